//! XML persistence of trees and the snapshot store for metric history.

pub mod store;
pub mod xml;

pub use store::{
    diff_reports, diff_snapshots, save_snapshot, CcChange, FunctionKey, Snapshot, SnapshotDiff,
    Store, StoreError, TreeFile,
};
pub use xml::{ecst_to_xml, xml_to_ecst, LoadedTree, XmlError};
