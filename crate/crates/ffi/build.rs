//! Regenerates include/ramsey_forge.h from the public extern "C" surface.
//! The header is checked in so C consumers can build without cargo; this
//! keeps it in sync whenever the crate itself is rebuilt.

use std::env;
use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").unwrap());
    let header = crate_dir.join("include").join("ramsey_forge.h");
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");

    let config = cbindgen::Config::from_file(crate_dir.join("cbindgen.toml"))
        .expect("cbindgen.toml parses");
    match cbindgen::Builder::new().with_crate(&crate_dir).with_config(config).generate() {
        Ok(bindings) => {
            bindings.write_to_file(header);
        }
        // Never fail the build over header generation (e.g. during a
        // rustfmt-broken intermediate state); the committed header remains.
        Err(e) => println!("cargo:warning=cbindgen skipped: {e}"),
    }
}
