use std::env;
use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").unwrap());
    let header = crate_dir.join("include").join("partint.h");

    let enumeration = cbindgen::EnumConfig {
        prefix_with_name: true,
        rename_variants: cbindgen::RenameRule::ScreamingSnakeCase,
        ..cbindgen::EnumConfig::default()
    };

    let config = cbindgen::Config {
        language: cbindgen::Language::C,
        include_guard: Some("PARTINT_H".to_string()),
        documentation: true,
        cpp_compat: true,
        enumeration,
        header: Some(
            "/* C interface to the partint Hamiltonian toolkit.\n\
             * Generated by cbindgen; do not edit by hand. */"
                .to_string(),
        ),
        ..cbindgen::Config::default()
    };

    cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
        .expect("header generation")
        .write_to_file(header);

    println!("cargo:rerun-if-changed=src/lib.rs");
}
