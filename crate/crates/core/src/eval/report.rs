// SPDX-License-Identifier: Apache-2.0

//! CSV and plain-text renderings of evaluation reports. Fractions carry six
//! decimals and percentages two.

use std::fmt::Write as _;

use super::dbh::DbhEvalReport;
use super::panoptic::PQReport;

fn opt(v: Option<f64>, dp: usize) -> String {
    v.map_or_else(String::new, |v| format!("{v:.dp$}"))
}

fn opt_text(v: Option<f64>, dp: usize) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.dp$}"))
}

fn pq_row(r: &PQReport, scale: f64) -> [f64; 6] {
    [
        r.ground.value * scale,
        r.shrub.value * scale,
        r.stem_iou.value * scale,
        r.canopy_iou.value * scale,
        r.tree.value * scale,
        r.overall * scale,
    ]
}

fn vacuous_list(r: &PQReport) -> String {
    let mut names: Vec<String> = r.vacuous_classes().iter().map(|c| c.to_string()).collect();
    if r.stem_iou.vacuous {
        names.push("stem".into());
    }
    if r.canopy_iou.vacuous {
        names.push("canopy".into());
    }
    names.join(";")
}

pub fn pq_report_csv(r: &PQReport) -> String {
    let mut out = String::from("scale,ground,shrub,stem,canopy,tree,pq,tp,fp,fn,vacuous\n");
    for (name, scale, dp) in [("fraction", 1.0, 6), ("percent", 100.0, 2)] {
        let cells: Vec<String> = pq_row(r, scale).iter().map(|v| format!("{v:.dp$}")).collect();
        let _ = writeln!(
            out,
            "{name},{},{},{},{},{}",
            cells.join(","),
            r.matching.tp(),
            r.matching.false_positives.len(),
            r.matching.false_negatives.len(),
            vacuous_list(r)
        );
    }
    out
}

pub fn pq_report_text(r: &PQReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<10}{:>9}{:>9}{:>9}{:>9}{:>9}{:>9}",
        "", "Ground", "Shrub", "Stem", "Canopy", "Tree", "PQ"
    );
    let pct = pq_row(r, 100.0);
    let frac = pq_row(r, 1.0);
    let _ = write!(out, "{:<10}", "percent");
    for v in pct {
        let _ = write!(out, "{v:>9.1}");
    }
    let _ = write!(out, "\n{:<10}", "fraction");
    for v in frac {
        let _ = write!(out, "{v:>9.4}");
    }
    let _ = writeln!(
        out,
        "\n\nStem and Canopy are semantic IoU; PQ averages Ground, Shrub and Tree."
    );
    let _ = writeln!(
        out,
        "tree instances: TP {}  FP {}  FN {}",
        r.matching.tp(),
        r.matching.false_positives.len(),
        r.matching.false_negatives.len()
    );
    let vacuous = vacuous_list(r);
    if !vacuous.is_empty() {
        let _ = writeln!(out, "absent from both frames (scored 1): {}", vacuous.replace(';', ", "));
    }
    out
}

pub fn dbh_report_csv(r: &DbhEvalReport) -> String {
    let mut out = String::from("plot_id,n_gt,n_pred,matched,recall,recall_pct,rmse_cm\n");
    for (plot, p) in &r.per_plot {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_field(plot).expect("in-memory write");
        w.write_record(None::<&[u8]>).expect("in-memory write");
        let quoted = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 plot id");
        let _ = writeln!(
            out,
            "{},{},{},{},{:.6},{:.2},{}",
            quoted.trim_end(),
            p.n_gt,
            p.n_pred,
            p.pairs.len(),
            p.recall,
            100.0 * p.recall,
            opt(p.rmse_cm, 4)
        );
    }
    let n_gt: usize = r.per_plot.values().map(|p| p.n_gt).sum();
    let n_pred: usize = r.per_plot.values().map(|p| p.n_pred).sum();
    let matched: usize = r.per_plot.values().map(|p| p.pairs.len()).sum();
    let _ = writeln!(
        out,
        "per_plot_avg,,,,{:.6},{:.2},{}",
        r.per_plot_avg_recall,
        100.0 * r.per_plot_avg_recall,
        opt(r.per_plot_avg_rmse_cm, 4)
    );
    let _ = writeln!(
        out,
        "overall,{n_gt},{n_pred},{matched},{:.6},{:.2},{}",
        r.overall_recall,
        100.0 * r.overall_recall,
        opt(r.overall_rmse_cm, 4)
    );
    out
}

pub fn dbh_report_text(r: &DbhEvalReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<14}{:^30}{:^30}", "", "Recall", "RMSE (cm)");
    let _ = writeln!(
        out,
        "{:<14}{:>15}{:>15}{:>15}{:>15}",
        "", "Per-plot Avg.", "Overall", "Per-plot Avg.", "Overall"
    );
    let _ = writeln!(
        out,
        "{:<14}{:>15.2}{:>15.2}{:>15}{:>15}",
        "fraction",
        r.per_plot_avg_recall,
        r.overall_recall,
        opt_text(r.per_plot_avg_rmse_cm, 2),
        opt_text(r.overall_rmse_cm, 2)
    );
    let _ = writeln!(
        out,
        "{:<14}{:>15.1}{:>15.1}",
        "percent",
        100.0 * r.per_plot_avg_recall,
        100.0 * r.overall_recall
    );
    let _ = writeln!(out);
    let _ = writeln!(out, "{:<14}{:>8}{:>8}{:>9}{:>9}{:>11}", "plot", "gt", "pred", "matched", "recall", "rmse_cm");
    for (plot, p) in &r.per_plot {
        let _ = writeln!(
            out,
            "{:<14}{:>8}{:>8}{:>9}{:>9.3}{:>11}",
            plot,
            p.n_gt,
            p.n_pred,
            p.pairs.len(),
            p.recall,
            opt_text(p.rmse_cm, 2)
        );
    }
    out
}
