//! Edge-stability analysis for translated dependency treebanks, label-only
//! UD transformations, and a pattern-based relation extractor for comparing
//! annotation schemes downstream.

pub mod conllu;
pub mod metrics;
pub mod repattern;
pub mod report;
pub mod stability;
pub mod transforms;
