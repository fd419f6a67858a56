#![allow(dead_code)]

use std::path::{Path, PathBuf};

use askner::cli::{Overrides, PipelineConfig};

pub fn toy_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/toy")
}

/// The bundled toy configuration, writing into `out`.
pub fn toy_config(out: &Path) -> PipelineConfig {
    let mut c = PipelineConfig::load(&toy_dir().join("config.toml")).unwrap();
    Overrides {
        out: Some(out.to_path_buf()),
        ..Overrides::default()
    }
    .apply(&mut c)
    .unwrap();
    c
}
