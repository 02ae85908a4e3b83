//! Golden-file corpus: curve files paired with expected report facts.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

pub struct Case {
    pub stem: String,
    pub curve: String,
    pub golden: String,
}

macro_rules! bundled {
    ($($stem:literal),* $(,)?) => {
        &[$((
            $stem,
            include_str!(concat!("../../../curves/", $stem, ".curve")),
            include_str!(concat!("../../../curves/", $stem, ".golden")),
        )),*]
    };
}

const BUNDLED: &[(&str, &str, &str)] = bundled![
    "conductor7",
    "cusp",
    "e345",
    "guttes6",
    "max-reduced-type",
    "qh-transform",
    "t4-11-17",
    "t7-8-9",
    "two-monomials",
];

pub fn bundled() -> Vec<Case> {
    BUNDLED
        .iter()
        .map(|&(stem, curve, golden)| Case {
            stem: stem.into(),
            curve: curve.into(),
            golden: golden.into(),
        })
        .collect()
}

/// Every `<stem>.curve` in `dir` with its `<stem>.golden`.
pub fn load_dir(dir: &Path) -> Result<Vec<Case>, String> {
    let entries = fs::read_dir(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    let mut paths: Vec<_> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "curve"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(format!("no .curve files in {}", dir.display()));
    }
    paths
        .iter()
        .map(|p| {
            let stem = p.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            let golden_path = p.with_extension("golden");
            let read = |q: &Path| fs::read_to_string(q).map_err(|e| format!("{}: {e}", q.display()));
            Ok(Case {
                curve: read(p)?,
                golden: read(&golden_path)?,
                stem,
            })
        })
        .collect()
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_golden(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("golden line {}: expected key = value", i + 1))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    if out.is_empty() {
        return Err("golden file has no entries".into());
    }
    Ok(out)
}

/// One line per golden key whose value differs from `facts`.
pub fn diff(golden: &BTreeMap<String, String>, facts: &BTreeMap<String, String>) -> Vec<String> {
    golden
        .iter()
        .filter_map(|(k, want)| match facts.get(k) {
            Some(got) if got == want => None,
            Some(got) => Some(format!("{k}: expected {want}, got {got}")),
            None => Some(format!("{k}: expected {want}, missing from report")),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_parsing_and_diff() {
        let g = parse_golden("# header\nconductor = 3\nmu = 3 # trailing\n").unwrap();
        assert_eq!(g.len(), 2);
        let mut f = BTreeMap::new();
        f.insert("conductor".to_string(), "3".to_string());
        f.insert("mu".to_string(), "4".to_string());
        assert_eq!(diff(&g, &f), vec!["mu: expected 3, got 4".to_string()]);
        f.remove("mu");
        assert_eq!(diff(&g, &f), vec!["mu: expected 3, missing from report".to_string()]);
        assert!(parse_golden("# nothing\n").is_err());
        assert!(parse_golden("conductor 3\n").is_err());
    }

    #[test]
    fn bundled_corpus_is_complete() {
        let cases = bundled();
        assert_eq!(cases.len(), 9);
        for c in &cases {
            assert!(parse_golden(&c.golden).is_ok(), "{}", c.stem);
        }
    }
}
