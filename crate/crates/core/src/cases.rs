//! Built-in case studies.

use thiserror::Error;

use crate::dataset::{read_csv_str, DatasetError, FailureDataset};
use crate::tree::{parse_ft, FaultTree, ParseError};

/// Names of known systems whose trees must be supplied as files.
pub const RESERVED: [&str; 5] = ["mpps", "covid19", "ddft", "pt", "sms"];

/// Every embedded case name.
pub const EMBEDDED: [&str; 1] = ["csd"];

const CSD_FT: &str = include_str!("../data/csd.ft");
const CSD_COMPLETE: &str = include_str!("../data/csd_complete.csv");

#[derive(Debug, Error)]
pub enum CaseError {
    #[error("case `{0}` is not embedded; pass its fault tree with --ft")]
    NeedsFile(String),
    #[error("unknown case `{0}`")]
    Unknown(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

/// A ground-truth tree with its complete dataset.
#[derive(Debug, Clone)]
pub struct Case {
    pub name: &'static str,
    pub tree: FaultTree,
    pub complete: FailureDataset,
}

fn lookup(name: &str) -> Result<(&'static str, &'static str, &'static str), CaseError> {
    let lower = name.to_ascii_lowercase();
    match lower.as_str() {
        "csd" => Ok(("csd", CSD_FT, CSD_COMPLETE)),
        n if RESERVED.contains(&n) => Err(CaseError::NeedsFile(lower)),
        _ => Err(CaseError::Unknown(name.to_string())),
    }
}

pub fn case(name: &str) -> Result<Case, CaseError> {
    let (name, ft, csv) = lookup(name)?;
    let tree = parse_ft(ft)?;
    let complete = read_csv_str(csv)?;
    Ok(Case { name, tree, complete })
}

/// Source text of an embedded tree.
pub fn case_text(name: &str) -> Result<&'static str, CaseError> {
    lookup(name).map(|(_, ft, _)| ft)
}

/// The cooling-system demonstrator: a common-cause pair or a valve branch
/// with a 2-out-of-3 seal vote.
pub fn csd() -> Case {
    case("csd").expect("embedded case is valid")
}
