//! JSON report files.

use std::path::Path;

use crate::error::Result;
use crate::types::RepairReport;

/// Writes `reports` as a pretty-printed JSON array sorted by `m`.
pub fn emit_report(reports: &[RepairReport], path: impl AsRef<Path>) -> Result<()> {
    let mut sorted = reports.to_vec();
    sorted.sort_by(|a, b| a.m.total_cmp(&b.m));
    let mut text = serde_json::to_string_pretty(&sorted)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_report(path: impl AsRef<Path>) -> Result<Vec<RepairReport>> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Method;

    fn report(m: f64) -> RepairReport {
        RepairReport::new(Method::Iflipper, m, 4.0, m.min(4.0), 1, 0.5, 1e-8)
    }

    #[test]
    fn sorted_by_m_and_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        emit_report(&[report(3.0), report(1.0), report(2.0)], &path).unwrap();
        let back = read_report(&path).unwrap();
        assert_eq!(
            back.iter().map(|r| r.m).collect::<Vec<_>>(),
            vec![1.0, 2.0, 3.0]
        );
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.find("\"method\"").unwrap() < text.find("\"num_flips\"").unwrap());
        assert!(text.contains("\"runtime_ms\""));
    }

    #[test]
    fn empty_list_is_an_empty_array() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        emit_report(&[], &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap().trim(), "[]");
        assert!(read_report(&path).unwrap().is_empty());
    }
}
