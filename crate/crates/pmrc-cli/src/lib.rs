//! On-disk formats and payload codecs for the `pmrc` command-line tool.

pub mod bytes;
pub mod manifest;
pub mod sharefile;

/// Manifest file name inside a deployment directory.
pub const MANIFEST_FILE: &str = "manifest.txt";

/// Share file name for one node.
pub fn share_file_name(node: usize) -> String {
    format!("node_{node}.pmrc")
}
