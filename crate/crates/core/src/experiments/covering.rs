use serde_json::json;

use super::{Cell, ExperimentReport, Verdict};
use crate::error::Result;
use crate::measure::{greedy_cover_select, IntervalCollection};

/// Greedy selection on one collection, with the three covering checks.
pub fn run_covering_demo(collection: &IntervalCollection, c: f64) -> Result<ExperimentReport> {
    let chosen = greedy_cover_select(collection, c)?;
    let inputs = json!({ "intervals": collection.intervals(), "c": c });
    let mut report = ExperimentReport::new("covering-demo", inputs, &["a", "b", "length"]);
    for iv in &chosen {
        report.push_row(vec![Cell::from(iv.a), iv.b.into(), iv.length().into()]);
    }
    let total: f64 = chosen.iter().map(|i| i.length()).sum();
    let disjoint = chosen
        .iter()
        .enumerate()
        .all(|(i, x)| chosen[i + 1..].iter().all(|y| !x.intersects(y)));
    let members = chosen.iter().all(|x| collection.intervals().contains(x));
    report.verdict(Verdict::new("selected intervals pairwise disjoint", disjoint, 0.0));
    report.verdict(Verdict::new("selected intervals belong to the collection", members, 0.0));
    report.verdict(Verdict::new("total length > c/3", total > c / 3.0, total - c / 3.0));
    report.summary = json!({
        "selected": chosen.iter().map(|i| (i.a, i.b)).collect::<Vec<_>>(),
        "total": total,
        "union": collection.union_measure(),
    });
    Ok(report)
}
