use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("gold answer is a set; use set_f1")]
    SetGold,
    #[error("gold answer is scalar; use exact_match")]
    ScalarGold,
    #[error("duplicate query id in report: {0}")]
    DuplicateId(String),
}
