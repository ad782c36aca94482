//! Regenerates the shipped polar reliability tables.
//!
//! Usage: `cargo run --example gen_reliability [output-dir]`

use std::path::PathBuf;

use ura_core::polar::{render_table, MAX_LOG2_LEN, MIN_LOG2_LEN};

fn main() -> std::io::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/reliability"));
    std::fs::create_dir_all(&dir)?;
    for m in MIN_LOG2_LEN..=MAX_LOG2_LEN {
        let n = 1usize << m;
        std::fs::write(dir.join(format!("n{n}.txt")), render_table(n))?;
    }
    Ok(())
}
