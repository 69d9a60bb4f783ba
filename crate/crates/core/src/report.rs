use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

/// One measured check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    /// Which statement of the theory the check witnesses.
    pub anchor: String,
    pub measured: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(default)]
    pub inputs: Map<String, Value>,
}

impl CheckRecord {
    /// pass iff measured <= tolerance (NaN fails).
    pub fn bound(name: &str, anchor: &str, measured: f64, tolerance: f64) -> CheckRecord {
        CheckRecord {
            name: name.into(),
            anchor: anchor.into(),
            // + 0.0 turns -0 into 0
            measured: measured + 0.0,
            tolerance,
            pass: measured <= tolerance,
            inputs: Map::new(),
        }
    }

    /// Order check: measured is the worst observed order, tolerance the minimum.
    pub fn order(name: &str, anchor: &str, errs: &[f64]) -> CheckRecord {
        let (pass, p) = crate::tolerances::order_verdict(errs);
        let mut r = CheckRecord {
            name: name.into(),
            anchor: anchor.into(),
            measured: p,
            tolerance: crate::tolerances::ORDER_MIN,
            pass,
            inputs: Map::new(),
        };
        r.inputs.insert("errors".into(), serde_json::json!(errs));
        if p.is_nan() {
            r.inputs.insert("at_roundoff_floor".into(), Value::Bool(true));
        }
        r
    }

    pub fn failed(name: &str, anchor: &str, why: &str) -> CheckRecord {
        let mut r = CheckRecord::bound(name, anchor, f64::NAN, 0.0);
        r.inputs.insert("error".into(), Value::String(why.into()));
        r
    }

    pub fn with(mut self, key: &str, v: impl Into<Value>) -> CheckRecord {
        self.inputs.insert(key.into(), v.into());
        self
    }

    /// One line, as printed by the CLI and the acceptance target.
    pub fn line(&self) -> String {
        format!(
            "{} {:<44} measured {:>11.4e}  tol {:>10.3e}  [{}]",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.tolerance,
            self.anchor
        )
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SuiteTiming {
    pub suite: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub tool_version: String,
    pub config: Map<String, Value>,
    pub records: Vec<CheckRecord>,
    #[serde(default)]
    pub convergence: Vec<ConvergenceRow>,
    #[serde(default)]
    pub timings: Vec<SuiteTiming>,
    pub pass: bool,
}

/// Measured value of one check on each refinement level with the fitted orders.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub name: String,
    pub n_x: Vec<usize>,
    pub measured: Vec<f64>,
    pub orders: Vec<f64>,
    pub pass: bool,
}

impl Report {
    pub fn new(config: Map<String, Value>) -> Report {
        Report {
            tool_version: env!("CARGO_PKG_VERSION").into(),
            config,
            records: vec![],
            convergence: vec![],
            timings: vec![],
            pass: true,
        }
    }

    pub fn push(&mut self, r: CheckRecord) {
        self.pass &= r.pass;
        self.records.push(r);
    }

    pub fn extend(&mut self, rs: impl IntoIterator<Item = CheckRecord>) {
        for r in rs {
            self.push(r);
        }
    }

    pub fn push_row(&mut self, row: ConvergenceRow) {
        self.pass &= row.pass;
        self.convergence.push(row);
    }

    pub fn failures(&self) -> Vec<&CheckRecord> {
        self.records.iter().filter(|r| !r.pass).collect()
    }

    /// JSON without timing fields, for determinism comparisons.
    pub fn to_json_untimed(&self) -> String {
        let mut r = self.clone();
        r.timings.clear();
        serde_json::to_string_pretty(&r).expect("report serializes")
    }
}
