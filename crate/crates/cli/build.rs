use std::process::Command;

fn main() {
    // Embed a git-describe-style build id for run manifests; fall back
    // to the package version when building outside a git checkout.
    let describe = Command::new("git")
        .args(["describe", "--always", "--dirty", "--tags"])
        .output()
        .ok()
        .filter(|output| output.status.success())
        .map(|output| String::from_utf8_lossy(&output.stdout).trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| env!("CARGO_PKG_VERSION").to_string());
    println!("cargo:rustc-env=CONVERSUM_BUILD_ID={describe}");
    println!("cargo:rerun-if-changed=../../.git/HEAD");
}
