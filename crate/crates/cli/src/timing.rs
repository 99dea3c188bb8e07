use std::time::Duration;

/// Wall-clock totals per pipeline phase over a batch of proteins.
#[derive(Clone, Debug, Default)]
pub struct TimingReport {
    proteins: usize,
    phases: Vec<(&'static str, Duration)>,
}

pub const GRAPH_BUILDING: &str = "graph_building";
pub const ATTRIBUTE_COMPUTATION: &str = "attribute_computation";
pub const CLASSIFICATION: &str = "classification";

impl TimingReport {
    pub fn new(proteins: usize) -> Self {
        Self {
            proteins,
            phases: Vec::new(),
        }
    }

    /// Adds `elapsed` to `phase`, creating it on first use. Phases keep
    /// their first-seen order.
    pub fn add(&mut self, phase: &'static str, elapsed: Duration) {
        match self.phases.iter_mut().find(|(name, _)| *name == phase) {
            Some((_, total)) => *total += elapsed,
            None => self.phases.push((phase, elapsed)),
        }
    }

    pub fn total(&self) -> Duration {
        self.phases.iter().map(|(_, d)| *d).sum()
    }

    fn per_protein(&self, d: Duration) -> f64 {
        if self.proteins == 0 {
            0.0
        } else {
            d.as_secs_f64() / self.proteins as f64
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("phase,total_seconds,per_protein_seconds\n");
        let rows = self.phases.iter().copied().chain(std::iter::once(("total", self.total())));
        for (name, d) in rows {
            out.push_str(&format!("{name},{:.6},{:.6}\n", d.as_secs_f64(), self.per_protein(d)));
        }
        out
    }
}
