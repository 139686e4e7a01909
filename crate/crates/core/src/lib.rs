//! Zero-shot semantic parsing of natural-language instructions into method
//! calls over an application's state.

pub mod domain;
pub mod knowledge;
pub mod logical_form;
pub mod features;
pub mod parser;
pub mod training;
pub mod synthetic;
pub mod evaluation;
pub mod cli;

/// Writes `bytes` to a temporary file next to `path` and renames it over
/// `path`.
pub fn write_atomic(path: &std::path::Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(std::path::Path::new("."));
    let name = path.file_name().ok_or_else(|| std::io::Error::other("path has no file name"))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)
}
