use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;

use chrono::Utc;

use super::backend::{Backend, GenerateError, GenerationRequest};
use super::corpus::TaskInstance;
use super::prompt::{build_prompt, TemplateSet};
use super::record::{record_line, strip_fences, DurationMode, GenerationRecord};
use super::HarnessError;
use crate::formats::FormatKind;

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub model_id: String,
    /// Requested formats, in output order. Each instance runs the ones it lists.
    pub formats: Vec<FormatKind>,
    pub parallelism: usize,
    pub strip_fences: bool,
    pub templates: TemplateSet,
    /// Records are appended here as they complete.
    pub journal: Option<PathBuf>,
}

impl RunOptions {
    pub fn new(model_id: impl Into<String>, formats: Vec<FormatKind>) -> Self {
        Self {
            model_id: model_id.into(),
            formats,
            parallelism: 1,
            strip_fences: true,
            templates: TemplateSet::default(),
            journal: None,
        }
    }
}

struct Job<'a> {
    instance: &'a TaskInstance,
    format: FormatKind,
    prompt: String,
}

/// Runs every `(instance, format)` pair once through `backend`.
///
/// Records come back in corpus order, then format order. A request that
/// fails after retries becomes a `failed` record; if every request fails
/// the run itself fails.
pub fn run_paired(
    corpus: &[TaskInstance],
    backend: &dyn Backend,
    opts: &RunOptions,
) -> Result<Vec<GenerationRecord>, HarnessError> {
    let mut jobs = Vec::new();
    for instance in corpus {
        for &format in &opts.formats {
            if instance.formats.contains(&format) {
                let prompt = build_prompt(instance, format, &opts.templates)?;
                jobs.push(Job {
                    instance,
                    format,
                    prompt,
                });
            }
        }
    }
    let mut journal = match &opts.journal {
        Some(path) => Some((
            File::create(path).map_err(|e| HarnessError::io(path, e))?,
            path.as_path(),
        )),
        None => None,
    };

    let next = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let mut slots: Vec<Option<GenerationRecord>> = (0..jobs.len()).map(|_| None).collect();
    let mut fatal = None;
    let mut first_backend_error = None;
    let workers = opts.parallelism.clamp(1, jobs.len().max(1));

    std::thread::scope(|scope| {
        let (tx, rx) = mpsc::channel();
        for _ in 0..workers {
            let tx = tx.clone();
            let (jobs, next, abort) = (&jobs, &next, &abort);
            scope.spawn(move || loop {
                if abort.load(Ordering::Relaxed) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(job) = jobs.get(i) else { break };
                if tx.send((i, execute(job, backend, opts))).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        // single writer: every record passes through here
        for (i, outcome) in rx {
            match outcome {
                Ok((record, err)) => {
                    if let (Some(e), None) = (err, &first_backend_error) {
                        first_backend_error = Some(e);
                    }
                    if let Some((file, path)) = journal.as_mut() {
                        let line = record_line(&record) + "\n";
                        if let Err(e) = file.write_all(line.as_bytes()).and_then(|_| file.flush()) {
                            fatal.get_or_insert(HarnessError::io(path, e));
                            abort.store(true, Ordering::Relaxed);
                        }
                    }
                    slots[i] = Some(record);
                }
                Err(e) => {
                    fatal.get_or_insert(e);
                    abort.store(true, Ordering::Relaxed);
                }
            }
        }
    });

    if let Some(e) = fatal {
        return Err(e);
    }
    let records: Vec<GenerationRecord> = slots.into_iter().map(|r| r.expect("every job reported")).collect();
    if !records.is_empty() && records.iter().all(|r| r.failed) {
        if let Some(e) = first_backend_error {
            return Err(HarnessError::Backend(e));
        }
    }
    Ok(records)
}

type Outcome = Result<(GenerationRecord, Option<super::BackendError>), HarnessError>;

fn execute(job: &Job<'_>, backend: &dyn Backend, opts: &RunOptions) -> Outcome {
    let req = GenerationRequest {
        model_id: &opts.model_id,
        instance_id: &job.instance.instance_id,
        format: job.format,
        prompt: &job.prompt,
    };
    let base = |output_text: String| GenerationRecord {
        instance_id: job.instance.instance_id.clone(),
        model_id: opts.model_id.clone(),
        format: job.format,
        prompt: job.prompt.clone(),
        output_text,
        n_tokens: 0,
        duration_s: 0.0,
        duration_mode: DurationMode::Roundtrip,
        energy_kwh: None,
        ce_kg: None,
        fence_stripped: false,
        failed: true,
        timestamp: Utc::now(),
    };
    match backend.generate(&req) {
        Ok(g) => {
            let (output_text, stripped) = if opts.strip_fences && !g.failed {
                strip_fences(&g.output_text)
            } else {
                (g.output_text, false)
            };
            Ok((
                GenerationRecord {
                    n_tokens: g.n_tokens,
                    duration_s: g.duration_s,
                    duration_mode: g.duration_mode,
                    energy_kwh: g.energy_kwh,
                    ce_kg: g.ce_kg,
                    fence_stripped: g.fence_stripped || stripped,
                    failed: g.failed,
                    timestamp: g.timestamp,
                    ..base(output_text)
                },
                None,
            ))
        }
        Err(GenerateError::Backend(e)) => Ok((base(String::new()), Some(e))),
        Err(GenerateError::ReplayMiss) => Err(HarnessError::ReplayMiss {
            model_id: opts.model_id.clone(),
            instance_id: job.instance.instance_id.clone(),
            format: job.format,
        }),
    }
}

/// Marks an output directory as owned by one run; removed on drop.
#[derive(Debug)]
pub struct OutputLock {
    path: PathBuf,
}

impl OutputLock {
    pub const FILE_NAME: &'static str = ".ecostruct.lock";

    pub fn acquire(dir: &Path) -> Result<Self, HarnessError> {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        let path = dir.join(Self::FILE_NAME);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(Self { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(HarnessError::Locked(path)),
            Err(e) => Err(HarnessError::io(&path, e)),
        }
    }
}

impl Drop for OutputLock {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.path);
    }
}
