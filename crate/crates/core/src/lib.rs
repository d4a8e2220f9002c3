pub mod corpus;
pub mod eval;
pub mod lda;
pub mod text;
pub mod vectorize;
pub mod tuning;
pub mod synthetic;
pub mod venues;
pub mod report;
pub mod pipeline;
pub mod cli;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/preprocessing.md")]
    mod preprocessing {}
    #[doc = include_str!("../../../book/src/vectorizing.md")]
    mod vectorizing {}
    #[doc = include_str!("../../../book/src/topic-model.md")]
    mod topic_model {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/tuning.md")]
    mod tuning {}
    #[doc = include_str!("../../../book/src/venues.md")]
    mod venues {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
