use std::fmt::Write as _;

use super::{RegulationReport, SubgroupStats};

fn rows(r: &RegulationReport) -> Vec<(String, f64)> {
    let mut out = Vec::new();
    for (m, v) in r.pc_dir_var.iter().enumerate() {
        out.push((format!("PC{} direction var", m + 1), *v));
    }
    out.push(("Avg PC direction var".into(), r.avg_pc_dir_var));
    for (m, v) in r.pc_shape_var.iter().enumerate() {
        out.push((format!("PC{} shape var", m + 1), *v));
    }
    out.push(("Avg PC shape var".into(), r.pc_shape_var_avg));
    out.push(("Avg PC kurtosis".into(), r.avg_kurtosis));
    out.push(("Avg PC |kurtosis|".into(), r.avg_abs_kurtosis));
    out.push(("Avg PC |skewness|".into(), r.avg_skewness));
    out.push(("Avg PC skewness (signed)".into(), r.skewness_signed));
    out.push(("Between-class var".into(), r.between_var));
    out.push(("Within-class var".into(), r.within_var));
    out
}

/// Aligned text table, one column per named report.
pub fn regulation_table(columns: &[(&str, &RegulationReport)]) -> String {
    let labelled: Vec<Vec<(String, f64)>> = columns.iter().map(|(_, r)| rows(r)).collect();
    let names: Vec<String> = labelled.first().map(|r| r.iter().map(|(n, _)| n.clone()).collect()).unwrap_or_default();
    let label_w = names.iter().map(|n| n.len()).max().unwrap_or(0).max(9);
    let col_w = columns.iter().map(|(n, _)| n.len()).max().unwrap_or(0).max(12);
    let mut s = String::new();
    write!(s, "{:<label_w$}", "Statistic").unwrap();
    for (name, _) in columns {
        write!(s, "  {name:>col_w$}").unwrap();
    }
    s.push('\n');
    for (i, n) in names.iter().enumerate() {
        write!(s, "{n:<label_w$}").unwrap();
        for col in &labelled {
            let v = col.get(i).map(|(_, v)| format!("{v:.4}")).unwrap_or_else(|| "-".into());
            write!(s, "  {v:>col_w$}").unwrap();
        }
        s.push('\n');
    }
    s
}

const CSV_HEADER: &str = "name,k,classes_used,avg_pc_dir_var,pc_shape_var_avg,avg_kurtosis,avg_abs_kurtosis,skewness_abs,skewness_signed,between_var,within_var,pc_dir_var,pc_shape_var";

fn csv_fields(r: &RegulationReport) -> String {
    let join = |v: &[f64]| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(";");
    format!(
        "{},{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{},{}",
        r.k,
        r.classes_used,
        r.avg_pc_dir_var,
        r.pc_shape_var_avg,
        r.avg_kurtosis,
        r.avg_abs_kurtosis,
        r.avg_skewness,
        r.skewness_signed,
        r.between_var,
        r.within_var,
        join(&r.pc_dir_var),
        join(&r.pc_shape_var)
    )
}

/// CSV with one row per named report; per-PC lists are `;`-separated.
pub fn regulation_csv(reports: &[(&str, &RegulationReport)]) -> String {
    let mut s = format!("{CSV_HEADER}\n");
    for (name, r) in reports {
        writeln!(s, "{name},{}", csv_fields(r)).unwrap();
    }
    s
}

pub fn subgroup_csv(groups: &[SubgroupStats]) -> String {
    let mut s = format!("group,start,end,eer,group_between_var,{}\n", &CSV_HEADER[5..]);
    for g in groups {
        writeln!(
            s,
            "{},{},{},{:e},{:e},{}",
            g.group,
            g.start,
            g.end,
            g.eer,
            g.between_var,
            csv_fields(&g.report)
        )
        .unwrap();
    }
    s
}
