//! File formats written by `infer`, `eval` and `experiment`.

use std::cmp::Reverse;
use std::fmt::Write as _;

use csv::{QuoteStyle, Terminator, WriterBuilder};
use ftforge_core::metrics::{self, MetricError};
use ftforge_core::moea::{GenerationLog, Individual};
use ftforge_core::{FailureDataset, FaultTree, McsMatrix, MofSetup};
use serde::Serialize;

pub const GENERATIONS_HEADER: &str =
    "generation,best_phi_s,best_phi_d,best_phi_c,mean_phi_s,mean_phi_d,mean_phi_c,front1_size,pool_size,elapsed_ms";

/// All three metrics of one tree, whatever the search optimised.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub phi_s: usize,
    pub phi_d: f64,
    /// 1 when the data has no cut sets or the tree has too many.
    pub phi_c: f64,
    /// Connected events minus the events the reference depends on.
    pub delta_be: i64,
}

/// Scores `ft` on `ds`. `m_d` defaults to the data's own cut sets and
/// `reference_bes` to the number of events appearing in them.
pub fn full_metrics(
    ft: &FaultTree,
    ds: &FailureDataset,
    m_d: Option<&McsMatrix>,
    reference_bes: Option<usize>,
) -> Result<Metrics, MetricError> {
    let owned;
    let m_d = match m_d {
        Some(m) => m,
        None => {
            owned = ds.extract_mcs();
            &owned
        }
    };
    let reference = reference_bes.unwrap_or_else(|| m_d.relevant().len());
    let setup = if m_d.is_empty() { MofSetup::Sd } else { MofSetup::Sdc };
    let o = metrics::objectives(ft, ds, Some(m_d), setup)?;
    Ok(Metrics {
        phi_s: ft.phi_s(),
        phi_d: o.phi_d,
        phi_c: if setup.uses_mcs() { o.phi_c } else { 1.0 },
        delta_be: ft.connected().len() as i64 - reference as i64,
    })
}

/// The generation log as CSV. Without `timings` the last column is left
/// blank so that equal seeds give equal files.
pub fn generations_csv(logs: &[GenerationLog], timings: bool) -> String {
    let mut out = String::with_capacity(64 * (logs.len() + 1));
    out.push_str(GENERATIONS_HEADER);
    out.push('\n');
    for g in logs {
        let _ = write!(
            out,
            "{},{},{},{},{},{},{},{},{},",
            g.generation,
            g.best_phi_s,
            g.best_phi_d,
            g.best_phi_c,
            g.mean_phi_s,
            g.mean_phi_d,
            g.mean_phi_c,
            g.front1_size,
            g.pool_size
        );
        if timings {
            let _ = write!(out, "{}", g.elapsed_ms);
        }
        out.push('\n');
    }
    out
}

/// First front of the final population, best first.
pub fn pareto_csv(front: &[Individual]) -> String {
    let mut w = lf_writer();
    w.write_record(["rank", "phi_s", "phi_d", "phi_c", "encoding"]).expect("in-memory write");
    for (i, ind) in front.iter().enumerate() {
        w.write_record([
            (i + 1).to_string(),
            ind.size.to_string(),
            ind.objectives.phi_d.to_string(),
            ind.objectives.phi_c.to_string(),
            ind.encoding.clone(),
        ])
        .expect("in-memory write");
    }
    into_string(w)
}

/// Cut sets as a 0/1 matrix with the event names as header, rows in the
/// order [`McsMatrix::format`] lists them.
pub fn matrix_csv(m: &McsMatrix) -> String {
    let mut w = lf_writer();
    w.write_record(m.universe.names()).expect("in-memory write");
    let mut rows = m.rows.clone();
    rows.sort_by_key(|r| (r.len(), Reverse(r.lex_key())));
    for r in rows {
        w.write_record((0..m.universe.len()).map(|c| if r.contains(c) { "1" } else { "0" })).expect("in-memory write");
    }
    into_string(w)
}

pub(crate) fn lf_writer() -> csv::Writer<Vec<u8>> {
    WriterBuilder::new().terminator(Terminator::Any(b'\n')).quote_style(QuoteStyle::Necessary).from_writer(Vec::new())
}

fn into_string(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("UTF-8 fields")
}

#[cfg(test)]
mod tests {
    use ftforge_core::cases::csd;
    use ftforge_core::tree::GateType;

    use super::*;

    #[test]
    fn csd_scores_itself_perfectly() {
        let c = csd();
        let m = full_metrics(&c.tree, &c.complete, None, None).unwrap();
        assert_eq!(m, Metrics { phi_s: 11, phi_d: 0.0, phi_c: 0.0, delta_be: 0 });
    }

    #[test]
    fn or_of_all_on_csd() {
        let c = csd();
        let or = FaultTree::flat(c.tree.universe().clone(), GateType::Or).unwrap();
        let m = full_metrics(&or, &c.complete, None, None).unwrap();
        assert_eq!(m.phi_d, 83.0 / 128.0);
        assert_eq!(m.phi_s, 8);
    }

    #[test]
    fn log_header_and_blank_timing() {
        let log = GenerationLog {
            generation: 1,
            best_phi_s: 4,
            best_phi_d: 0.5,
            best_phi_c: 1.0,
            mean_phi_s: 4.0,
            mean_phi_d: 0.25,
            mean_phi_c: 0.0,
            front1_size: 2,
            pool_size: 7,
            elapsed_ms: 12,
        };
        let text = generations_csv(std::slice::from_ref(&log), false);
        assert_eq!(text, format!("{GENERATIONS_HEADER}\n1,4,0.5,1,4,0.25,0,2,7,\n"));
        assert!(generations_csv(&[log], true).ends_with(",7,12\n"));
    }
}
