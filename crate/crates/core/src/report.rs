//! Cross-subject summary tables, as CSV and as aligned plain text.

use crate::activity::RatioReport;
use crate::models::ModelKind;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Rows × columns of optional numbers plus a trailing column-mean row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub corner: String,
    pub columns: Vec<String>,
    pub rows: Vec<(String, Vec<Option<f64>>)>,
    pub decimals: usize,
}

impl Table {
    pub fn averages(&self) -> Vec<Option<f64>> {
        (0..self.columns.len())
            .map(|c| {
                let vals: Vec<f64> = self.rows.iter().filter_map(|(_, r)| r[c]).collect();
                (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
            })
            .collect()
    }

    fn body(&self) -> Vec<Vec<String>> {
        let fmt = |v: &Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.*}", self.decimals));
        let mut out =
            vec![std::iter::once(self.corner.clone()).chain(self.columns.iter().cloned()).collect::<Vec<_>>()];
        for (name, vals) in &self.rows {
            out.push(std::iter::once(name.clone()).chain(vals.iter().map(fmt)).collect());
        }
        out.push(std::iter::once("Avg".to_string()).chain(self.averages().iter().map(fmt)).collect());
        out
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in self.body() {
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
    }

    pub fn to_text(&self) -> String {
        let body = self.body();
        let widths: Vec<usize> =
            (0..body[0].len()).map(|c| body.iter().map(|r| r[c].chars().count()).max().unwrap_or(0)).collect();
        let mut s = String::new();
        for (i, row) in body.iter().enumerate() {
            let cells: Vec<String> = row
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(c, (v, w))| if c == 0 { format!("{v:<w$}") } else { format!("{v:>w$}") })
                .collect();
            s.push_str(cells.join("  ").trim_end());
            s.push('\n');
            if i == 0 || i == body.len() - 2 {
                s.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
                s.push('\n');
            }
        }
        s
    }
}

/// Subjects × (task, condition) amplitude-ratio table.
pub fn ratio_table(reports: &[RatioReport]) -> Table {
    let mut columns = BTreeSet::new();
    for r in reports {
        for c in r.conditions.keys() {
            columns.insert((r.task, *c));
        }
    }
    let columns: Vec<_> = columns.into_iter().collect();
    let rows = reports
        .iter()
        .map(|r| {
            let vals =
                columns.iter().map(|(t, c)| (r.task == *t).then(|| r.conditions.get(c).copied()).flatten()).collect();
            (r.subject_id.clone(), vals)
        })
        .collect();
    Table {
        corner: "subject".into(),
        columns: columns.iter().map(|(t, c)| format!("{}/{}", t.as_str(), c.short_name())).collect(),
        rows,
        decimals: 2,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyEntry {
    pub subject: String,
    pub device: String,
    pub model: ModelKind,
    pub accuracy: f64,
}

/// Subjects × (model, device) accuracy table, in percent.
pub fn accuracy_table(entries: &[AccuracyEntry]) -> Table {
    let mut subjects: Vec<String> = Vec::new();
    let mut cells: BTreeMap<(ModelKind, String), BTreeMap<String, f64>> = BTreeMap::new();
    for e in entries {
        if !subjects.contains(&e.subject) {
            subjects.push(e.subject.clone());
        }
        cells.entry((e.model, e.device.clone())).or_default().insert(e.subject.clone(), e.accuracy * 100.0);
    }
    let columns: Vec<_> = cells.keys().cloned().collect();
    let rows =
        subjects.iter().map(|s| (s.clone(), columns.iter().map(|k| cells[k].get(s).copied()).collect())).collect();
    Table {
        corner: "subject".into(),
        columns: columns.iter().map(|(m, d)| format!("{m}/{d}")).collect(),
        rows,
        decimals: 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::session::{Label, Task};

    fn report(subject: &str, thumb: f64) -> RatioReport {
        RatioReport {
            subject_id: subject.into(),
            task: Task::IsolatedMovement,
            conditions: [(Label::ThumbAbduction, thumb)].into_iter().collect(),
            per_channel: BTreeMap::new(),
            amplitudes: BTreeMap::new(),
        }
    }

    #[test]
    fn ratio_table_has_average_row() {
        let t = ratio_table(&[report("H1", 2.0), report("H2", 4.0)]);
        assert_eq!(t.columns, vec!["isolated_movement/Thumb"]);
        assert_eq!(t.averages(), vec![Some(3.0)]);
        let csv = t.to_csv();
        assert_eq!(csv.lines().last().unwrap(), "Avg,3.00");
        assert!(t.to_text().contains("Avg"));
    }

    #[test]
    fn accuracy_table_layout() {
        let e = |s: &str, m, a| AccuracyEntry { subject: s.into(), device: "sleeve".into(), model: m, accuracy: a };
        let t = accuracy_table(&[e("A", ModelKind::Lda, 0.9), e("A", ModelKind::Rf, 0.8), e("B", ModelKind::Lda, 0.7)]);
        assert_eq!(t.columns, vec!["LDA/sleeve", "RF/sleeve"]);
        assert_eq!(t.rows[1].1, vec![Some(70.0), None]);
        assert!(t.to_csv().contains("B,70.0,-"));
    }
}
