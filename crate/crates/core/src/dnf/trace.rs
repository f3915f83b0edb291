use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;
use crate::io_util::write_atomic;

pub const TRACE_COLUMNS: [&str; 14] = [
    "epoch",
    "nll",
    "avg_kurtosis",
    "avg_skewness",
    "pc1_dir_var",
    "pc2_dir_var",
    "avg_pc_dir_var",
    "pc_shape_var_avg",
    "between_var",
    "within_var",
    "bw_ratio",
    "ce_inner",
    "ce_cosine",
    "train_eer_cosine",
];

/// Diagnostics after one epoch (row 0 is the untrained model).
///
/// Statistics that cannot be computed on the probe set (for example too few
/// samples per class) are NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochDiagnostics {
    pub epoch: usize,
    pub nll: f64,
    pub avg_kurtosis: f64,
    pub avg_skewness: f64,
    pub pc1_dir_var: f64,
    pub pc2_dir_var: f64,
    pub avg_pc_dir_var: f64,
    pub pc_shape_var_avg: f64,
    pub between_var: f64,
    pub within_var: f64,
    pub bw_ratio: f64,
    pub ce_inner: f64,
    pub ce_cosine: f64,
    pub train_eer_cosine: f64,
}

impl EpochDiagnostics {
    pub(crate) fn empty(epoch: usize, nll: f64) -> Self {
        Self {
            epoch,
            nll,
            avg_kurtosis: f64::NAN,
            avg_skewness: f64::NAN,
            pc1_dir_var: f64::NAN,
            pc2_dir_var: f64::NAN,
            avg_pc_dir_var: f64::NAN,
            pc_shape_var_avg: f64::NAN,
            between_var: f64::NAN,
            within_var: f64::NAN,
            bw_ratio: f64::NAN,
            ce_inner: f64::NAN,
            ce_cosine: f64::NAN,
            train_eer_cosine: f64::NAN,
        }
    }

    fn values(&self) -> [f64; 13] {
        [
            self.nll,
            self.avg_kurtosis,
            self.avg_skewness,
            self.pc1_dir_var,
            self.pc2_dir_var,
            self.avg_pc_dir_var,
            self.pc_shape_var_avg,
            self.between_var,
            self.within_var,
            self.bw_ratio,
            self.ce_inner,
            self.ce_cosine,
            self.train_eer_cosine,
        ]
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiagnosticTrace {
    pub epochs: Vec<EpochDiagnostics>,
}

impl DiagnosticTrace {
    pub fn to_csv(&self) -> String {
        let mut s = TRACE_COLUMNS.join(",");
        s.push('\n');
        for e in &self.epochs {
            write!(s, "{}", e.epoch).unwrap();
            for v in e.values() {
                if v.is_nan() {
                    s.push_str(",nan");
                } else {
                    write!(s, ",{v:?}").unwrap();
                }
            }
            s.push('\n');
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_csv().as_bytes())
    }

    pub fn first(&self) -> Option<&EpochDiagnostics> {
        self.epochs.first()
    }

    pub fn last(&self) -> Option<&EpochDiagnostics> {
        self.epochs.last()
    }
}
