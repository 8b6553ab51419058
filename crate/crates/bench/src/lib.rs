//! Fixture loading shared by the benches.

use std::path::{Path, PathBuf};

use skillgraph_core::{SiteAliases, Skill, SkillLibraryFile};

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

pub fn library_10() -> Vec<Skill> {
    SkillLibraryFile::load(&fixtures_dir().join("library_10.json"))
        .expect("fixture library")
        .skills
}

pub fn shop_page(name: &str) -> String {
    std::fs::read_to_string(fixtures_dir().join("shop").join(name)).expect("fixture page")
}

pub fn aliases() -> SiteAliases {
    [("shop.test", "shopping"), ("gitlab.test", "gitlab")]
        .into_iter()
        .map(|(k, v)| (k.to_owned(), v.to_owned()))
        .collect()
}

/// `n` copies of the fixture library spread over distinct wildcard nodes.
pub fn synthetic_library(n: usize) -> Vec<Skill> {
    let base = library_10();
    (0..n)
        .map(|i| {
            let mut s = base[i % base.len()].clone();
            s.name = format!("{}_{i}", s.name);
            if i >= base.len() {
                s.meta_url = format!("shopping/section{}/*", i % 50);
            }
            s
        })
        .collect()
}
