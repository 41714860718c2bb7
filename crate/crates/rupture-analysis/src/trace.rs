/// Diagnostics recorded after every accepted time step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub t: f64,
    /// Film thickness at the critical point.
    pub h_min: f64,
    pub x_c: f64,
    pub hxx_c: f64,
    pub hxxxx_c: f64,
    pub dt: f64,
    pub energy: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RuptureTrace {
    pub records: Vec<TraceRecord>,
}

impl RuptureTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, r: TraceRecord) {
        self.records.push(r);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn column(&self, f: impl Fn(&TraceRecord) -> f64) -> Vec<f64> {
        self.records.iter().map(f).collect()
    }
}
