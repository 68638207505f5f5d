//! The checking pipeline and corpus runs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::certify::{self, ProgressOutline};
use crate::classify::classify;
use crate::diag::{self, Code, Diagnostic};
use crate::engine::depth_limit_from_env;
use crate::ir::roles::RoleView;
use crate::ir::{ContextSummary, RoleEnv, TypedLanguage};
use crate::par;
use crate::preservation::{check_preservation, RuleCheck};
use crate::progress::{check_progress, TopoOrder};
use crate::syntax::load;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Certified,
    Rejected,
    InvalidInput,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Certified => "certified",
            Verdict::Rejected => "rejected",
            Verdict::InvalidInput => "invalid-input",
        })
    }
}

impl std::str::FromStr for Verdict {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "certified" => Ok(Verdict::Certified),
            "rejected" => Ok(Verdict::Rejected),
            "invalid-input" => Ok(Verdict::InvalidInput),
            _ => Err(format!("unknown verdict `{s}`")),
        }
    }
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Certified => 0,
            Verdict::Rejected => 1,
            Verdict::InvalidInput => 2,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PhaseResult {
    pub phase: &'static str,
    pub ran: bool,
    pub errors: usize,
    pub warnings: usize,
}

#[derive(Serialize)]
pub struct CheckReport {
    pub language: String,
    pub file: String,
    pub verdict: Verdict,
    pub phases: Vec<PhaseResult>,
    pub roles: Vec<RoleView>,
    pub preservation: Vec<RuleCheck>,
    pub diagnostics: Vec<Diagnostic>,
    /// Wall time per phase in milliseconds.
    pub timing_ms: BTreeMap<&'static str, f64>,
}

impl CheckReport {
    /// Error codes, sorted and deduplicated.
    pub fn error_codes(&self) -> BTreeSet<Code> {
        self.diagnostics
            .iter()
            .filter(|d| d.is_error())
            .map(|d| d.code)
            .collect()
    }

    pub fn has(&self, code: Code) -> bool {
        self.diagnostics.iter().any(|d| d.code == code)
    }
}

/// Everything computed for one language.
pub struct Analysis {
    pub report: CheckReport,
    pub lang: Option<TypedLanguage>,
    pub roles: RoleEnv,
    pub topo: TopoOrder,
    pub errctx: Option<ContextSummary>,
    pub preservation: Vec<RuleCheck>,
    /// Progress outlines; empty unless certified.
    pub outlines: Vec<ProgressOutline>,
}

#[derive(Clone, Copy, Debug)]
pub struct CheckOptions {
    pub depth_limit: u32,
    /// Keep entailment traces in preservation results.
    pub trace: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            depth_limit: depth_limit_from_env(),
            trace: false,
        }
    }
}

pub fn language_name(path: &str) -> String {
    Path::new(path)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.to_string())
}

fn phase(name: &'static str, ran: bool, diags: &[Diagnostic]) -> PhaseResult {
    PhaseResult {
        phase: name,
        ran,
        errors: diags.iter().filter(|d| d.is_error()).count(),
        warnings: diags.iter().filter(|d| !d.is_error()).count(),
    }
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1000.0
}

/// Sorts, drops repeated E200 reports about the same argument, and drops
/// E203 for an argument already reported as missing its context.
fn finish(file: &str, mut diags: Vec<Diagnostic>) -> Vec<Diagnostic> {
    for d in &mut diags {
        d.location.file.get_or_insert_with(|| file.to_string());
    }
    diag::sort(&mut diags);
    let mut seen = BTreeSet::new();
    diags.retain(|d| d.code != Code::E200 || seen.insert(d.related.clone()));
    diags.retain(|d| d.code != Code::E203 || !seen.contains(&d.related));
    diags
}

/// Checks one language. Every phase runs even when an earlier one reported
/// errors, except after a syntax or kind error.
pub fn check_source(file: &str, text: &str, opts: &CheckOptions) -> Analysis {
    let language = language_name(file);
    let mut timing = BTreeMap::new();
    let t = Instant::now();
    let loaded = load(file, text);
    timing.insert("parse", ms(t));
    let lang = match loaded {
        Ok(l) => l,
        Err(ds) => {
            let phases = vec![
                phase("parse", true, &ds),
                phase("classify", false, &[]),
                phase("progress", false, &[]),
                phase("preservation", false, &[]),
            ];
            return Analysis {
                report: CheckReport {
                    language,
                    file: file.to_string(),
                    verdict: Verdict::InvalidInput,
                    phases,
                    roles: Vec::new(),
                    preservation: Vec::new(),
                    diagnostics: finish(file, ds),
                    timing_ms: timing,
                },
                lang: None,
                roles: RoleEnv::default(),
                topo: TopoOrder::new(),
                errctx: None,
                preservation: Vec::new(),
                outlines: Vec::new(),
            };
        }
    };

    let t = Instant::now();
    let cls = classify(&lang);
    timing.insert("classify", ms(t));

    let t = Instant::now();
    let mut prog = check_progress(&lang, &cls);
    prog.diagnostics.extend(certify::uninhabited(&lang.signature, &prog.roles));
    timing.insert("progress", ms(t));

    let t = Instant::now();
    let rules: Vec<&str> = prog.roles.gamma_r.iter().map(|b| b.rule()).collect();
    let (checks, pres_diags) = check_preservation(&lang, &rules, opts.depth_limit, opts.trace);
    timing.insert("preservation", ms(t));

    let phases = vec![
        phase("parse", true, &[]),
        phase("classify", true, &cls.diagnostics),
        phase("progress", true, &prog.diagnostics),
        phase("preservation", true, &pres_diags),
    ];
    let mut all = cls.diagnostics;
    all.extend(prog.diagnostics);
    all.extend(pres_diags);
    let diagnostics = finish(file, all);
    let verdict = if diagnostics.iter().any(Diagnostic::is_error) {
        Verdict::Rejected
    } else {
        Verdict::Certified
    };
    let outlines = if verdict == Verdict::Certified {
        certify::outlines(&lang, &prog.roles, &prog.topo, prog.errctx.as_ref())
    } else {
        Vec::new()
    };
    Analysis {
        report: CheckReport {
            language,
            file: file.to_string(),
            verdict,
            phases,
            roles: prog.roles.view(),
            preservation: checks.clone(),
            diagnostics,
            timing_ms: timing,
        },
        lang: Some(lang),
        roles: prog.roles,
        topo: prog.topo,
        errctx: prog.errctx,
        preservation: checks,
        outlines,
    }
}

/// Reads and checks a file; an unreadable file is invalid input.
pub fn check_file(path: &Path, opts: &CheckOptions) -> Analysis {
    let file = path.display().to_string();
    match std::fs::read_to_string(path) {
        Ok(text) => check_source(&file, &text, opts),
        Err(e) => {
            let d = Diagnostic::new(Code::E001, format!("cannot read file: {e}"));
            let mut a = check_source(&file, "", opts);
            a.report.verdict = Verdict::InvalidInput;
            a.report.diagnostics = finish(&file, vec![d]);
            a.lang = None;
            a
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DriverError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("manifest line {line}: {message}")]
    Manifest { line: usize, message: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ManifestEntry {
    pub file: String,
    pub expected: Verdict,
    /// When present, the exact set of error codes expected.
    pub codes: Option<BTreeSet<Code>>,
}

/// One entry per line: `<file> <verdict> [<code>..]`. `#` starts a comment.
pub fn parse_manifest(text: &str) -> Result<Vec<ManifestEntry>, DriverError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| DriverError::Manifest {
            line: i + 1,
            message,
        };
        let mut words = line.split_whitespace();
        let file = words.next().unwrap_or_default().to_string();
        let expected = words
            .next()
            .ok_or_else(|| err("missing verdict".into()))?
            .parse()
            .map_err(err)?;
        let codes: BTreeSet<Code> = words
            .map(|w| w.parse().map_err(|e: diag::UnknownCode| err(e.to_string())))
            .collect::<Result<_, _>>()?;
        out.push(ManifestEntry {
            file,
            expected,
            codes: (!codes.is_empty()).then_some(codes),
        });
    }
    Ok(out)
}

#[derive(Serialize)]
pub struct CorpusEntry {
    pub file: String,
    pub expected: Option<ManifestEntry>,
    pub verdict: Verdict,
    pub codes: BTreeSet<Code>,
    pub matches: bool,
    pub report: CheckReport,
}

#[derive(Serialize)]
pub struct CorpusReport {
    pub entries: Vec<CorpusEntry>,
    /// Manifest entries without a file.
    pub missing: Vec<String>,
    pub passed: usize,
    pub failed: usize,
    pub timing_ms: f64,
}

impl CorpusReport {
    pub fn all_match(&self) -> bool {
        self.failed == 0 && self.missing.is_empty()
    }
}

fn matches(e: &ManifestEntry, r: &CheckReport) -> bool {
    e.expected == r.verdict && e.codes.as_ref().is_none_or(|c| *c == r.error_codes())
}

/// Checks every `.mod` file of `dir` against the manifest.
pub fn run_corpus(
    dir: &Path,
    manifest: &Path,
    opts: &CheckOptions,
    serial: bool,
) -> Result<CorpusReport, DriverError> {
    let start = Instant::now();
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| DriverError::Io { path, source }
    };
    let entries = parse_manifest(&std::fs::read_to_string(manifest).map_err(io(manifest))?)?;
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io(dir))?
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "mod"))
        .collect();
    files.sort();
    let analyses = par::map(&files, serial, |p| check_file(p, opts).report);
    let mut found = BTreeSet::new();
    let results: Vec<CorpusEntry> = files
        .iter()
        .zip(analyses)
        .map(|(p, report)| {
            let base = p
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            found.insert(base.clone());
            let expected = entries.iter().find(|e| e.file == base).cloned();
            CorpusEntry {
                matches: expected.as_ref().is_some_and(|e| matches(e, &report)),
                file: base,
                expected,
                verdict: report.verdict,
                codes: report.error_codes(),
                report,
            }
        })
        .collect();
    let passed = results.iter().filter(|e| e.matches).count();
    Ok(CorpusReport {
        failed: results.len() - passed,
        passed,
        missing: entries
            .iter()
            .filter(|e| !found.contains(&e.file))
            .map(|e| e.file.clone())
            .collect(),
        entries: results,
        timing_ms: ms(start),
    })
}

/// JSON with every `timing_ms` field removed, for comparing runs.
pub fn without_timing(v: &serde_json::Value) -> serde_json::Value {
    use serde_json::Value;
    match v {
        Value::Object(m) => Value::Object(
            m.iter()
                .filter(|(k, _)| k.as_str() != "timing_ms")
                .map(|(k, v)| (k.clone(), without_timing(v)))
                .collect(),
        ),
        Value::Array(a) => Value::Array(a.iter().map(without_timing).collect()),
        other => other.clone(),
    }
}
