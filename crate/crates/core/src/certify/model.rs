use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::admissible::ExponentPair;
use crate::classify::ParamSet;
use crate::error::CertifyError;
use crate::exact::SlackRational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
}

impl Relation {
    pub fn holds<T: Ord>(&self, lhs: &T, rhs: &T) -> bool {
        match self {
            Relation::Lt => lhs < rhs,
            Relation::Le => lhs <= rhs,
            Relation::Eq => lhs == rhs,
            Relation::Ge => lhs >= rhs,
            Relation::Gt => lhs > rhs,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
            Relation::Gt => ">",
        })
    }
}

/// One evaluated row `lhs rel rhs`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    pub label: String,
    pub lhs: SlackRational,
    pub rel: Relation,
    pub rhs: SlackRational,
    pub pass: bool,
}

impl Constraint {
    pub fn new(label: impl Into<String>, lhs: SlackRational, rel: Relation, rhs: SlackRational) -> Self {
        let pass = rel.holds(&lhs, &rhs);
        Constraint { label: label.into(), lhs, rel, rhs, pass }
    }

    /// Recompute the truth value from the stored sides.
    pub fn recheck(&self) -> bool {
        self.rel.holds(&self.lhs, &self.rhs)
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = if self.pass { "ok" } else { "FAIL" };
        write!(f, "[{mark}] {}: {} {} {}", self.label, self.lhs, self.rel, self.rhs)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lemma {
    /// Weighted nonlinearity in the Sobolev norm used by the Duhamel term.
    SobolevEstimate,
    /// Weighted difference estimate in Lebesgue norms used for the contraction.
    LebesgueDifference,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Piece {
    Local,
    Exterior,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseTag {
    #[serde(rename = "s_lt_half_d")]
    SLtHalfD,
    #[serde(rename = "s_ge_half_d")]
    SGeHalfD,
}

impl fmt::Display for Lemma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Lemma::SobolevEstimate => "sobolev_estimate",
            Lemma::LebesgueDifference => "lebesgue_difference",
        })
    }
}

impl fmt::Display for Piece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Piece::Local => "local",
            Piece::Exterior => "exterior",
        })
    }
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CaseTag::SLtHalfD => "s_lt_half_d",
            CaseTag::SGeHalfD => "s_ge_half_d",
        })
    }
}

/// Exponents witnessing one nonlinear estimate on one piece of the weight.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubCertificate {
    pub lemma: Lemma,
    pub piece: Piece,
    pub case: CaseTag,
    pub branch: String,
    pub pairs: BTreeMap<String, ExponentPair>,
    pub aux: BTreeMap<String, SlackRational>,
    pub theta: SlackRational,
    pub constraints: Vec<Constraint>,
}

impl SubCertificate {
    pub fn name(&self) -> String {
        format!("{}/{}", self.lemma, self.piece)
    }

    pub fn pair(&self, key: &str) -> Option<&ExponentPair> {
        self.pairs.get(key)
    }

    pub fn all_satisfied(&self) -> bool {
        self.constraints.iter().all(|c| c.pass)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FullCertificate {
    pub params: ParamSet,
    pub sub: Vec<SubCertificate>,
    pub theta: SlackRational,
    pub regularity_checks: Vec<Constraint>,
}

impl FullCertificate {
    /// The time-space pairs `(p_i, q_i)` that define the contraction space.
    pub fn space_pairs(&self) -> BTreeMap<String, ExponentPair> {
        self.sub
            .iter()
            .flat_map(|s| s.pairs.iter())
            .filter(|(k, _)| k.starts_with("(p"))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect()
    }

    pub fn find(&self, lemma: Lemma, piece: Piece) -> Option<&SubCertificate> {
        self.sub.iter().find(|s| s.lemma == lemma && s.piece == piece)
    }

    pub fn find_mut(&mut self, lemma: Lemma, piece: Piece) -> Option<&mut SubCertificate> {
        self.sub.iter_mut().find(|s| s.lemma == lemma && s.piece == piece)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, CertifyError> {
        serde_json::from_str(text).map_err(|e| CertifyError::Format(e.to_string()))
    }
}
