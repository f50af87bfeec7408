use std::collections::BTreeMap;
use std::path::Path;

use super::{DeductionError, DeductiveProcess};
use crate::logic::{parse_sentence, TheoryFragment};

/// Parses the line format `day <n>: <sentence>`, with `#` comments.
/// Sentences accumulate: `D_n` holds every sentence listed for days `<= n`.
pub fn parse_script(text: &str) -> Result<DeductiveProcess, DeductionError> {
    let mut additions: BTreeMap<u64, Vec<_>> = BTreeMap::new();
    let mut previous = 0u64;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| DeductionError::Script { line: line_no, message };
        let rest = line
            .strip_prefix("day")
            .ok_or_else(|| err("expected `day <n>: <sentence>`".into()))?;
        let (day_text, sentence_text) = rest
            .split_once(':')
            .ok_or_else(|| err("missing `:` after the day number".into()))?;
        let day: u64 = day_text
            .trim()
            .parse()
            .map_err(|_| err(format!("bad day number `{}`", day_text.trim())))?;
        if day == 0 {
            return Err(err("days start at 1".into()));
        }
        if day < previous {
            return Err(DeductionError::NonMonotone {
                line: line_no,
                day,
                previous,
            });
        }
        previous = day;
        let s = parse_sentence(sentence_text).map_err(|e| err(e.to_string()))?;
        additions.entry(day).or_default().push(s);
    }

    let mut days = BTreeMap::new();
    let mut acc = TheoryFragment::new();
    for (day, sentences) in additions {
        acc.extend(sentences);
        days.insert(day, acc.clone());
    }
    Ok(DeductiveProcess::scripted(days))
}

pub fn load_script(path: &Path) -> Result<DeductiveProcess, DeductionError> {
    let text = std::fs::read_to_string(path).map_err(|e| DeductionError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_script(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_sentence;

    fn frag(texts: &[&str]) -> TheoryFragment {
        texts.iter().map(|t| parse_sentence(t).unwrap()).collect()
    }

    #[test]
    fn gaps_repeat_previous_fragment() {
        let d = parse_script("day 1: a\n# comment\n\nday 5: b\n").unwrap();
        assert_eq!(d.step(3).unwrap(), frag(&["a"]));
        assert_eq!(d.step(5).unwrap(), frag(&["a", "b"]));
    }

    #[test]
    fn empty_script_is_empty_process() {
        let d = parse_script("").unwrap();
        assert!(d.step(1).unwrap().is_empty());
        assert!(d.step(40).unwrap().is_empty());
    }

    #[test]
    fn duplicate_lines_are_deduplicated() {
        let d = parse_script("day 2: a & b\nday 2: (a & b)\nday 3: a & b").unwrap();
        assert_eq!(d.step(3).unwrap().len(), 1);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_script("day x: a"),
            Err(DeductionError::Script { line: 1, .. })
        ));
        assert!(matches!(parse_script("a"), Err(DeductionError::Script { .. })));
        assert!(matches!(
            parse_script("day 1: a\nday 2: a &"),
            Err(DeductionError::Script { line: 2, .. })
        ));
        assert!(matches!(
            parse_script("day 4: a\nday 2: b"),
            Err(DeductionError::NonMonotone {
                line: 2,
                day: 2,
                previous: 4
            })
        ));
    }

    #[test]
    fn load_from_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("facts.txt");
        std::fs::write(&path, "day 1: a\n").unwrap();
        assert_eq!(load_script(&path).unwrap().step(1).unwrap(), frag(&["a"]));
        assert!(matches!(
            load_script(&dir.path().join("missing.txt")),
            Err(DeductionError::Io { .. })
        ));
    }
}
