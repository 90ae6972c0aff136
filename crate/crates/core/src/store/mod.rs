//! Weight archives, histogram export and synthetic tensors.

mod histogram;
mod qgw;
mod random;

use thiserror::Error;

use crate::tensor::TensorError;

pub use histogram::{
    export_histogram, histogram, write_histogram_csv, Bin, HistogramSpec, HISTOGRAM_HEADER,
};
pub use qgw::{decode_weights, encode_weights, read_weights, write_weights, MAGIC};
pub use random::{random_tensor, random_tensor_with_sigma, TensorKind, DEFAULT_SIGMA};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("I/O error")]
    Io(#[from] std::io::Error),
    #[error("bad magic: not a QGW1 file")]
    BadMagic,
    #[error("file ends before the declared contents")]
    TruncatedFile,
    #[error("{0} unexpected bytes after the last tensor")]
    TrailingBytes(usize),
    #[error("duplicate tensor name `{0}`")]
    DuplicateName(String),
    #[error("tensor names must be non-empty")]
    EmptyName,
    #[error("tensor name is not valid UTF-8")]
    InvalidName,
    #[error("length {0} does not fit in u32")]
    TooLarge(usize),
    #[error("invalid histogram: {0}")]
    InvalidHistogram(String),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}
