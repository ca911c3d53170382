/// One logged point of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub iter: u64,
    pub sfo_calls: u64,
    /// Thread CPU time since the run started; absent when timing is off.
    pub cpu_seconds: Option<f64>,
    /// True (nonsmooth) objective of the reported iterate.
    pub objective: f64,
    /// `objective - reference` when a reference value is known.
    pub gap: Option<f64>,
    pub accuracy: Option<f64>,
}

/// The time series of one seeded run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub label: String,
    pub seed: u64,
    pub rows: Vec<RunRow>,
}

impl RunRecord {
    pub fn new(label: impl Into<String>, seed: u64) -> Self {
        RunRecord { label: label.into(), seed, rows: Vec::new() }
    }

    /// `<label>_seed<seed>.csv`
    pub fn file_name(&self) -> String {
        format!("{}_seed{}.csv", self.label, self.seed)
    }

    /// Inverse of [`file_name`](Self::file_name) on the stem; unknown
    /// shapes give `(stem, 0)`.
    pub fn parse_file_stem(stem: &str) -> (String, u64) {
        if let Some((label, seed)) = stem.rsplit_once("_seed") {
            if let Ok(s) = seed.parse() {
                return (label.to_string(), s);
            }
        }
        (stem.to_string(), 0)
    }

    pub fn last(&self) -> Option<&RunRow> {
        self.rows.last()
    }

    /// SFO count at the first logged row whose gap is at most `eps`.
    pub fn sfo_to_gap(&self, eps: f64) -> Option<u64> {
        self.rows.iter().find(|r| r.gap.is_some_and(|g| g <= eps)).map(|r| r.sfo_calls)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_name_roundtrip() {
        let r = RunRecord::new("drpo_ssag", 12);
        let name = r.file_name();
        assert_eq!(RunRecord::parse_file_stem(name.trim_end_matches(".csv")), ("drpo_ssag".to_string(), 12));
        assert_eq!(RunRecord::parse_file_stem("plain"), ("plain".to_string(), 0));
    }
}
