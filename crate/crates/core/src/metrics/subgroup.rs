use crate::data::VectorSet;
use crate::error::{Error, Result};
use crate::linear::{apply, compute_scatter, LinearTransform};
use crate::scalar::Real;

use super::{all_pairs_cosine, eer, regulation_report, RegulationReport};

/// Statistics of one contiguous group of discriminant dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct SubgroupStats {
    pub group: usize,
    pub start: usize,
    pub end: usize,
    pub report: RegulationReport,
    /// All-pairs cosine EER using only this group's dimensions.
    pub eer: f64,
    pub between_var: f64,
}

/// Projects with `transform` (rows sorted by discriminant rank) and reports
/// each block of `group_size` dimensions separately; the last group may be
/// smaller.
pub fn subgroup_report<T: Real>(
    set: &VectorSet<T>,
    transform: &LinearTransform<T>,
    group_size: usize,
    k: usize,
    min_class_samples: usize,
) -> Result<Vec<SubgroupStats>> {
    let out = transform.out_dim();
    if group_size == 0 || group_size > out {
        return Err(Error::InvalidConfig(format!(
            "group size {group_size} must be in 1..={out}"
        )));
    }
    if group_size == out {
        return Err(Error::InvalidConfig(format!(
            "group size {group_size} leaves a single group of {out} dims"
        )));
    }
    let projected = apply(transform, set)?;
    let mut groups = Vec::new();
    let mut start = 0;
    while start < out {
        let end = (start + group_size).min(out);
        let sub = projected.select_dims(start, end);
        let report = regulation_report(&sub, k, min_class_samples)?;
        let (tg, nt) = all_pairs_cosine(&sub)?;
        let e = eer(&tg, &nt)?;
        let sc = compute_scatter(&sub)?;
        groups.push(SubgroupStats {
            group: groups.len(),
            start,
            end,
            report,
            eer: e.eer,
            between_var: sc.between.trace().as_f64() / (end - start) as f64,
        });
        start = end;
    }
    Ok(groups)
}
