//! Regression corpus: `<category>/<case>.cpp` next to `<case>.expect`.
//!
//! Line 1 of an expect file is `SUCCESSFUL` or `FAILED`; an optional line 2
//! holds extra command-line flags for the case.

use std::path::{Path, PathBuf};

use cxxbmc_core::goto::CheckOptions;
use cxxbmc_core::symex::SymexConfig;
use cxxbmc_core::verify::Verdict;

#[derive(Clone, Debug)]
pub struct Case {
    pub category: String,
    pub name: String,
    pub path: PathBuf,
    pub expected: Verdict,
    pub flags: Vec<String>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Settings {
    pub check: CheckOptions,
    pub cfg: SymexConfig,
}

impl Case {
    pub fn source(&self) -> String {
        std::fs::read_to_string(&self.path).unwrap_or_else(|e| panic!("{}: {e}", self.path.display()))
    }

    pub fn settings(&self) -> Result<Settings, String> {
        parse_flags(&self.flags)
    }
}

pub fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

/// Translates corpus flags to checker settings.
pub fn parse_flags(flags: &[String]) -> Result<Settings, String> {
    let mut s = Settings::default();
    let mut it = flags.iter();
    while let Some(f) = it.next() {
        match f.as_str() {
            "--unwind" => {
                let v = it.next().ok_or("--unwind needs a value")?;
                s.cfg.unwind = v.parse().map_err(|_| format!("bad bound `{v}`"))?;
            }
            "--unwinding-assertions" => s.cfg.unwinding_assertions = true,
            "--overflow-check" => s.check.overflow = true,
            "--bounds-check" => s.check.bounds = true,
            "--memory-check" => s.check.memory = true,
            _ => return Err(format!("unsupported corpus flag `{f}`")),
        }
    }
    Ok(s)
}

pub fn parse_expect(text: &str) -> Result<(Verdict, Vec<String>), String> {
    let mut lines = text.lines();
    let verdict = match lines.next().map(str::trim) {
        Some("SUCCESSFUL") => Verdict::Successful,
        Some("FAILED") => Verdict::Failed,
        other => return Err(format!("bad verdict line {other:?}")),
    };
    let flags = lines
        .next()
        .map(|l| l.split_whitespace().map(String::from).collect())
        .unwrap_or_default();
    Ok((verdict, flags))
}

/// All cases under `dir`, sorted by category and name.
pub fn load(dir: &Path) -> Result<Vec<Case>, String> {
    let mut out = Vec::new();
    let cats = std::fs::read_dir(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    for cat in cats {
        let cat = cat.map_err(|e| e.to_string())?.path();
        if !cat.is_dir() {
            continue;
        }
        let category = cat.file_name().unwrap().to_string_lossy().into_owned();
        for f in std::fs::read_dir(&cat).map_err(|e| e.to_string())? {
            let path = f.map_err(|e| e.to_string())?.path();
            if path.extension().is_none_or(|e| e != "cpp") {
                continue;
            }
            let exp = path.with_extension("expect");
            let text = std::fs::read_to_string(&exp).map_err(|e| format!("{}: {e}", exp.display()))?;
            let (expected, flags) = parse_expect(&text).map_err(|e| format!("{}: {e}", exp.display()))?;
            out.push(Case {
                category: category.clone(),
                name: path.file_stem().unwrap().to_string_lossy().into_owned(),
                path,
                expected,
                flags,
            });
        }
    }
    out.sort_by(|a, b| (&a.category, &a.name).cmp(&(&b.category, &b.name)));
    Ok(out)
}
