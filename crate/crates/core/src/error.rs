use thiserror::Error;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("JSON parse error at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("PNML parse error at {position}: {message}")]
    Pnml { position: String, message: String },
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("arc `{arc}` connects two {kind}s (`{source_id}` -> `{target}`)")]
    SameKindArc {
        arc: String,
        kind: &'static str,
        source_id: String,
        target: String,
    },
    #[error("unknown place `{place}` referenced by `{context}`")]
    UnknownPlace { place: String, context: String },
    #[error("unknown transition `{0}`")]
    UnknownTransition(String),
    #[error("arc between `{transition}` and `{place}` has weight 0")]
    ZeroWeight { transition: String, place: String },
    #[error("not a workflow net: {0}")]
    NotWorkflow(String),
    #[error("net has arc weights greater than 1")]
    Weighted,
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
