use crate::value::{Mapping, Number, ValueNode};

use super::{ToonDialect, ToonError, ToonErrorKind as Kind};

/// Strict mode enforces declared lengths and unique sibling keys; lenient
/// mode accepts length mismatches and lets later duplicate keys win.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    #[default]
    Strict,
    Lenient,
}

/// Strict parse of a TOON document.
pub fn parse_toon(input: &str, dialect: &ToonDialect) -> Result<ValueNode, ToonError> {
    parse_toon_with(input, dialect, ParseMode::Strict)
}

pub fn parse_toon_with(input: &str, dialect: &ToonDialect, mode: ParseMode) -> Result<ValueNode, ToonError> {
    let normalized = input.replace("\r\n", "\n");
    let lines = split_lines(&normalized, dialect.indent_width())?;
    let mut parser = Parser {
        lines,
        pos: 0,
        delimiter: dialect.delimiter(),
        strict: mode == ParseMode::Strict,
    };
    parser.document()
}

#[derive(Debug, Clone, Copy)]
struct Line<'a> {
    number: usize,
    depth: usize,
    content: &'a str,
}

fn split_lines(input: &str, width: usize) -> Result<Vec<Line<'_>>, ToonError> {
    let mut out = Vec::new();
    for (idx, raw) in input.split('\n').enumerate() {
        let number = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let spaces = raw.bytes().take_while(|b| *b == b' ').count();
        if raw[spaces..].starts_with('\t') {
            return Err(ToonError::new(Kind::IndentationError, number, "tab in indentation"));
        }
        if spaces % width != 0 {
            return Err(ToonError::new(
                Kind::IndentationError,
                number,
                format!("indent of {spaces} spaces is not a multiple of {width}"),
            ));
        }
        out.push(Line {
            number,
            depth: spaces / width,
            content: raw[spaces..].trim_end(),
        });
    }
    Ok(out)
}

struct ArrayHeader<'a> {
    len: usize,
    fields: Option<Vec<String>>,
    inline: &'a str,
}

struct Parser<'a> {
    lines: Vec<Line<'a>>,
    pos: usize,
    delimiter: char,
    strict: bool,
}

impl<'a> Parser<'a> {
    fn document(&mut self) -> Result<ValueNode, ToonError> {
        let Some(first) = self.lines.first().copied() else {
            return Ok(ValueNode::Mapping(Mapping::new()));
        };
        if first.depth != 0 {
            return Err(ToonError::new(
                Kind::IndentationError,
                first.number,
                "document must start at column 1",
            ));
        }
        let root = if first.content.starts_with('[') {
            self.pos = 1;
            let header = self.array_header(first.content, first.number)?;
            let value = self.array_body(header, first.number, 1)?;
            if let Some(extra) = self.lines.get(self.pos) {
                return Err(ToonError::new(
                    Kind::MalformedHeader,
                    extra.number,
                    "unexpected content after root array",
                ));
            }
            value
        } else {
            ValueNode::Mapping(self.mapping_entries(0, Mapping::new())?)
        };
        debug_assert_eq!(self.pos, self.lines.len());
        Ok(root)
    }

    fn mapping_entries(&mut self, depth: usize, mut map: Mapping) -> Result<Mapping, ToonError> {
        while let Some(line) = self.lines.get(self.pos).copied() {
            if line.depth < depth {
                break;
            }
            if line.depth > depth {
                return Err(ToonError::new(
                    Kind::IndentationError,
                    line.number,
                    "unexpected indentation",
                ));
            }
            self.pos += 1;
            let (key, value) = self.entry(line.content, line.number, depth + 1)?;
            self.insert(&mut map, key, value, line.number)?;
        }
        Ok(map)
    }

    fn insert(&self, map: &mut Mapping, key: String, value: ValueNode, line: usize) -> Result<(), ToonError> {
        if self.strict {
            map.push_unique(key, value)
                .map_err(|d| ToonError::new(Kind::DuplicateKey, line, format!("key `{}` already defined", d.0)))
        } else {
            map.insert(key, value);
            Ok(())
        }
    }

    /// One `key...` line; nested content lives at `child_depth`.
    fn entry(&mut self, content: &'a str, line: usize, child_depth: usize) -> Result<(String, ValueNode), ToonError> {
        let (key, rest) = parse_key(content, line)?;
        if rest.starts_with('[') {
            let header = self.array_header(rest, line)?;
            let value = self.array_body(header, line, child_depth)?;
            return Ok((key, value));
        }
        let Some(after) = rest.strip_prefix(':') else {
            return Err(ToonError::new(
                Kind::MalformedHeader,
                line,
                format!("expected `:` after key `{key}`"),
            ));
        };
        let after = after.trim();
        if after.is_empty() {
            let nested = self.mapping_entries(child_depth, Mapping::new())?;
            return Ok((key, ValueNode::Mapping(nested)));
        }
        Ok((key, parse_scalar(after, line)?))
    }

    fn array_header(&self, text: &'a str, line: usize) -> Result<ArrayHeader<'a>, ToonError> {
        let malformed = |msg: &str| ToonError::new(Kind::MalformedHeader, line, msg.to_string());
        let body = text.strip_prefix('[').ok_or_else(|| malformed("expected `[`"))?;
        let digits = body.bytes().take_while(u8::is_ascii_digit).count();
        if digits == 0 {
            return Err(malformed("array length must be a non-negative integer"));
        }
        let len: usize = body[..digits]
            .parse()
            .map_err(|_| malformed("array length out of range"))?;
        let mut rest = body[digits..]
            .strip_prefix(']')
            .ok_or_else(|| malformed("expected `]` after array length"))?;
        let mut fields = None;
        if let Some(inner) = rest.strip_prefix('{') {
            let close = find_unquoted(inner, '}').ok_or_else(|| malformed("unterminated field list"))?;
            let mut names = Vec::new();
            for raw in split_unquoted(&inner[..close], self.delimiter, line)? {
                let raw = raw.trim();
                let (name, tail) = parse_key(raw, line)?;
                if !tail.is_empty() {
                    return Err(malformed("invalid field name"));
                }
                if names.contains(&name) {
                    return Err(ToonError::new(
                        Kind::DuplicateKey,
                        line,
                        format!("field `{name}` repeated"),
                    ));
                }
                names.push(name);
            }
            fields = Some(names);
            rest = &inner[close + 1..];
        }
        let inline = rest
            .strip_prefix(':')
            .ok_or_else(|| malformed("expected `:` after array header"))?
            .trim();
        Ok(ArrayHeader { len, fields, inline })
    }

    fn check_len(&self, declared: usize, actual: usize, line: usize) -> Result<(), ToonError> {
        if self.strict && declared != actual {
            return Err(ToonError::new(
                Kind::LengthMismatch,
                line,
                format!("declared {declared} elements, found {actual}"),
            ));
        }
        Ok(())
    }

    fn array_body(&mut self, header: ArrayHeader<'a>, line: usize, child_depth: usize) -> Result<ValueNode, ToonError> {
        if let Some(fields) = header.fields {
            if !header.inline.is_empty() {
                return Err(ToonError::new(
                    Kind::MalformedHeader,
                    line,
                    "tabular header must end with `:`",
                ));
            }
            let mut rows = Vec::new();
            while let Some(row) = self.lines.get(self.pos).copied() {
                if row.depth < child_depth {
                    break;
                }
                if row.depth > child_depth {
                    return Err(ToonError::new(
                        Kind::IndentationError,
                        row.number,
                        "unexpected indentation in table",
                    ));
                }
                self.pos += 1;
                let cells = split_unquoted(row.content, self.delimiter, row.number)?;
                if cells.len() != fields.len() {
                    return Err(ToonError::new(
                        Kind::FieldCountMismatch,
                        row.number,
                        format!("expected {} fields, found {}", fields.len(), cells.len()),
                    ));
                }
                let mut map = Mapping::new();
                for (name, cell) in fields.iter().zip(cells) {
                    map.insert(name.clone(), parse_scalar(cell.trim(), row.number)?);
                }
                rows.push(ValueNode::Mapping(map));
            }
            self.check_len(header.len, rows.len(), line)?;
            return Ok(ValueNode::Sequence(rows));
        }
        if !header.inline.is_empty() {
            let items = split_unquoted(header.inline, self.delimiter, line)?
                .into_iter()
                .map(|cell| parse_scalar(cell.trim(), line))
                .collect::<Result<Vec<_>, _>>()?;
            self.check_len(header.len, items.len(), line)?;
            return Ok(ValueNode::Sequence(items));
        }
        let items = self.list_items(child_depth)?;
        self.check_len(header.len, items.len(), line)?;
        Ok(ValueNode::Sequence(items))
    }

    fn list_items(&mut self, depth: usize) -> Result<Vec<ValueNode>, ToonError> {
        let mut items = Vec::new();
        while let Some(line) = self.lines.get(self.pos).copied() {
            if line.depth < depth {
                break;
            }
            if line.depth > depth {
                return Err(ToonError::new(
                    Kind::IndentationError,
                    line.number,
                    "unexpected indentation in list",
                ));
            }
            let item = if line.content == "-" {
                ""
            } else if let Some(rest) = line.content.strip_prefix("- ") {
                rest.trim_start()
            } else {
                return Err(ToonError::new(
                    Kind::MalformedHeader,
                    line.number,
                    "expected list item `- `",
                ));
            };
            self.pos += 1;
            items.push(self.list_item(item, line.number, depth)?);
        }
        Ok(items)
    }

    fn list_item(&mut self, item: &'a str, line: usize, depth: usize) -> Result<ValueNode, ToonError> {
        if item.is_empty() {
            return Ok(ValueNode::Mapping(Mapping::new()));
        }
        if item.starts_with('[') {
            let header = self.array_header(item, line)?;
            return self.array_body(header, line, depth + 1);
        }
        if looks_like_entry(item) {
            // first field sits on the hyphen line; the rest follow one level in
            let (key, value) = self.entry(item, line, depth + 2)?;
            let mut map = Mapping::new();
            map.insert(key, value);
            return Ok(ValueNode::Mapping(self.mapping_entries(depth + 1, map)?));
        }
        parse_scalar(item, line)
    }
}

fn is_bare_key_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || matches!(b, b'_' | b'.' | b'-')
}

/// Splits a leading key off `content`, returning the key and the remainder.
fn parse_key(content: &str, line: usize) -> Result<(String, &str), ToonError> {
    if content.starts_with('"') {
        let (key, consumed) = parse_quoted(content, line)?;
        return Ok((key, &content[consumed..]));
    }
    let n = content.bytes().take_while(|b| is_bare_key_byte(*b)).count();
    if n == 0 {
        return Err(ToonError::new(Kind::MalformedHeader, line, "expected a key"));
    }
    Ok((content[..n].to_string(), &content[n..]))
}

fn looks_like_entry(item: &str) -> bool {
    let rest = if item.starts_with('"') {
        match quoted_end(item) {
            Some(end) => &item[end..],
            None => return false,
        }
    } else {
        let n = item.bytes().take_while(|b| is_bare_key_byte(*b)).count();
        if n == 0 {
            return false;
        }
        &item[n..]
    };
    rest.starts_with(':') || rest.starts_with('[')
}

/// Byte offset just past the closing quote of a string starting at 0.
fn quoted_end(s: &str) -> Option<usize> {
    let mut escaped = false;
    for (i, c) in s.char_indices().skip(1) {
        match c {
            _ if escaped => escaped = false,
            '\\' => escaped = true,
            '"' => return Some(i + 1),
            _ => {}
        }
    }
    None
}

/// Decodes a quoted string at the start of `s`; returns it and bytes consumed.
fn parse_quoted(s: &str, line: usize) -> Result<(String, usize), ToonError> {
    let mut out = String::new();
    let mut chars = s.char_indices().skip(1);
    while let Some((i, c)) = chars.next() {
        match c {
            '"' => return Ok((out, i + 1)),
            '\\' => {
                let Some((_, esc)) = chars.next() else { break };
                out.push(match esc {
                    '\\' => '\\',
                    '"' => '"',
                    'n' => '\n',
                    'r' => '\r',
                    't' => '\t',
                    other => {
                        return Err(ToonError::new(
                            Kind::InvalidEscape,
                            line,
                            format!("unknown escape `\\{other}`"),
                        ));
                    }
                });
            }
            c => out.push(c),
        }
    }
    Err(ToonError::new(Kind::UnterminatedQuote, line, "missing closing `\"`"))
}

fn find_unquoted(s: &str, target: char) -> Option<usize> {
    let mut in_quote = false;
    let mut escaped = false;
    for (i, c) in s.char_indices() {
        if in_quote {
            match c {
                _ if escaped => escaped = false,
                '\\' => escaped = true,
                '"' => in_quote = false,
                _ => {}
            }
        } else if c == '"' {
            in_quote = true;
        } else if c == target {
            return Some(i);
        }
    }
    None
}

fn split_unquoted(s: &str, delimiter: char, line: usize) -> Result<Vec<&str>, ToonError> {
    let mut parts = Vec::new();
    let mut start = 0;
    let mut in_quote = false;
    let mut escaped = false;
    for (i, c) in s.char_indices() {
        if in_quote {
            match c {
                _ if escaped => escaped = false,
                '\\' => escaped = true,
                '"' => in_quote = false,
                _ => {}
            }
        } else if c == '"' {
            in_quote = true;
        } else if c == delimiter {
            parts.push(&s[start..i]);
            start = i + c.len_utf8();
        }
    }
    if in_quote {
        return Err(ToonError::new(Kind::UnterminatedQuote, line, "missing closing `\"`"));
    }
    parts.push(&s[start..]);
    Ok(parts)
}

fn parse_scalar(token: &str, line: usize) -> Result<ValueNode, ToonError> {
    if token.starts_with('"') {
        let (text, consumed) = parse_quoted(token, line)?;
        if !token[consumed..].trim().is_empty() {
            return Err(ToonError::new(
                Kind::MalformedHeader,
                line,
                "unexpected text after quoted string",
            ));
        }
        return Ok(ValueNode::Text(text));
    }
    Ok(match token {
        "true" => ValueNode::Bool(true),
        "false" => ValueNode::Bool(false),
        "null" => ValueNode::Null,
        _ => match token.parse::<Number>() {
            Ok(n) => ValueNode::Number(n),
            Err(_) => ValueNode::Text(token.to_string()),
        },
    })
}
