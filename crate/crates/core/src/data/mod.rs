//! Dataset loaders, generators and run-record persistence.

mod libsvm;
mod record_io;
mod returns;
mod split;
pub mod synthetic;

pub use libsvm::{load_libsvm, write_libsvm, SparseDataset};
pub use record_io::{read_run_record, write_run_record, RecordReader, RecordWriter, RECORD_HEADER};
pub use returns::{load_returns_csv, write_returns_csv, ReturnsTable};
pub use split::split_train_test;
