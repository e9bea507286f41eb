use std::time::{SystemTime, UNIX_EPOCH};

// The run manifest must be identical across runs of one binary, so the
// recorded timestamp is the build time (overridable through
// SOURCE_DATE_EPOCH for reproducible builds), never the wall clock.
fn main() {
    println!("cargo:rerun-if-env-changed=SOURCE_DATE_EPOCH");
    let epoch = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.parse::<u64>().ok())
        .unwrap_or_else(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .expect("system clock before the epoch")
                .as_secs()
        });
    println!("cargo:rustc-env=FASCOP_BUILD_UNIX={epoch}");
}
