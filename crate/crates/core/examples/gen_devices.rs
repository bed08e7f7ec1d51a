//! Rewrites the bundled device files from their generators.

use std::path::Path;

fn main() -> std::io::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("devices");
    for (name, device) in esp_router::device::bundled::regenerate() {
        std::fs::write(dir.join(name), device.to_json() + "\n")?;
    }
    Ok(())
}
