use std::collections::BTreeMap;

use serde::Deserialize;

use super::corpus::TaskInstance;
use crate::formats::FormatKind;

pub const DESCRIPTION_SLOT: &str = "{description}";

const PREAMBLE: &str = "You are a structured data generator. Respond with the requested document only, with no explanation and no code fences.";

const TOON_RULES: &str = "\
TOON (Token-Oriented Object Notation) rules:
- Indent nested blocks by 2 spaces per level. Never use tabs.
- A scalar field is written `key: value`.
- A nested object is written `key:` followed by its fields indented one level.
- An array of primitives is written inline with its length: `tags[3]: a,b,c`.
- An array of objects that all have the same primitive fields is written as a table: `users[2]{id,name}:` followed by one indented row per object, values separated by commas in header order.
- Any other array is written `items[N]:` followed by one indented `- ` item per element.
- The declared length [N] must equal the number of elements or rows.
- true, false and null are literals; numbers follow JSON number syntax.
- Quote a string with double quotes when it is empty, contains a comma, colon, quote, backslash, brackets or braces, has leading or trailing spaces, or would otherwise read as a number, boolean or null.
- Keys matching [A-Za-z0-9_.-]+ are written bare; any other key is double-quoted.";

/// Prompt pieces for one format. `task` holds exactly one `{description}` slot.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PromptTemplate {
    pub preamble: String,
    pub format_rules: String,
    pub task: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("no prompt template for {0}")]
    MissingTemplate(FormatKind),
    #[error("template for {0} must contain exactly one {{description}} slot")]
    BadSlot(FormatKind),
}

impl PromptTemplate {
    pub fn default_for(format: FormatKind) -> Self {
        let format_rules = match format {
            FormatKind::Toon => TOON_RULES.to_string(),
            other => format!("Output format: a single valid {} document.", other.label()),
        };
        Self {
            preamble: PREAMBLE.into(),
            format_rules,
            task: format!("Task:\n{DESCRIPTION_SLOT}"),
        }
    }

    pub fn render(&self, description: &str) -> String {
        let task = self.task.replacen(DESCRIPTION_SLOT, description, 1);
        [self.preamble.as_str(), self.format_rules.as_str(), task.as_str()]
            .iter()
            .filter(|s| !s.is_empty())
            .copied()
            .collect::<Vec<_>>()
            .join("\n\n")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateSet {
    templates: BTreeMap<FormatKind, PromptTemplate>,
}

impl Default for TemplateSet {
    fn default() -> Self {
        Self {
            templates: FormatKind::ALL
                .iter()
                .map(|f| (*f, PromptTemplate::default_for(*f)))
                .collect(),
        }
    }
}

impl TemplateSet {
    pub fn empty() -> Self {
        Self {
            templates: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, format: FormatKind, template: PromptTemplate) -> Result<(), PromptError> {
        if template.task.matches(DESCRIPTION_SLOT).count() != 1 {
            return Err(PromptError::BadSlot(format));
        }
        self.templates.insert(format, template);
        Ok(())
    }

    pub fn get(&self, format: FormatKind) -> Option<&PromptTemplate> {
        self.templates.get(&format)
    }
}

pub fn build_prompt(t: &TaskInstance, format: FormatKind, templates: &TemplateSet) -> Result<String, PromptError> {
    let template = templates.get(format).ok_or(PromptError::MissingTemplate(format))?;
    Ok(template.render(&t.description))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::ValueNode;

    fn task() -> TaskInstance {
        TaskInstance {
            instance_id: "t1".into(),
            description: "List two users.".into(),
            expected: ValueNode::Null,
            formats: vec![FormatKind::Json, FormatKind::Toon],
        }
    }

    #[test]
    fn json_prompt_is_directive_plus_task() {
        let p = build_prompt(&task(), FormatKind::Json, &TemplateSet::default()).unwrap();
        assert_eq!(
            p,
            format!("{PREAMBLE}\n\nOutput format: a single valid JSON document.\n\nTask:\nList two users.")
        );
    }

    #[test]
    fn toon_prompt_embeds_rules() {
        let set = TemplateSet::default();
        let toon = build_prompt(&task(), FormatKind::Toon, &set).unwrap();
        assert!(toon.contains(TOON_RULES));
        for f in [FormatKind::Json, FormatKind::Xml, FormatKind::Yaml] {
            assert!(toon.len() > build_prompt(&task(), f, &set).unwrap().len());
        }
    }

    #[test]
    fn missing_and_malformed_templates() {
        assert_eq!(
            build_prompt(&task(), FormatKind::Xml, &TemplateSet::empty()),
            Err(PromptError::MissingTemplate(FormatKind::Xml))
        );
        let mut set = TemplateSet::empty();
        let mut t = PromptTemplate::default_for(FormatKind::Json);
        t.task = "no slot".into();
        assert_eq!(
            set.insert(FormatKind::Json, t),
            Err(PromptError::BadSlot(FormatKind::Json))
        );
    }

    #[test]
    fn description_braces_are_not_reexpanded() {
        let mut t = task();
        t.description = "use {description} literally".into();
        let p = build_prompt(&t, FormatKind::Json, &TemplateSet::default()).unwrap();
        assert!(p.ends_with("use {description} literally"));
    }
}
