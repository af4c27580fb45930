//! Building a Chinese noun-phrase corpus annotated with plurality and
//! definiteness by projecting English morphology across word alignments,
//! plus the analyses, classifiers and agreement scoring built on it.

pub mod agreement;
pub mod align;
pub mod analysis;
pub mod assessment;
pub mod classifier;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod hashing;
pub mod matcher;
pub mod projection;
pub mod tree;

pub use align::{AlignmentSet, Direction};
pub use corpus::{
    AnnotatedNP, Answer, AssessmentRecord, Definiteness, FourWay, Judgment, NPSpan, ParallelSentence, Plurality,
    Protocol, Side, SpanRef, Split,
};
pub use error::{Error, Result};
pub use matcher::NPMatch;
pub use tree::ParseTree;
