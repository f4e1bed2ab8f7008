//! Prints the built-in configuration as JSON. Regenerate the shipped
//! reference with:
//!
//! ```text
//! cargo run -p battmdp-core --example default_config > params/default_config.json
//! ```

use battmdp_core::config::SimConfig;

fn main() {
    println!(
        "{}",
        serde_json::to_string_pretty(&SimConfig::default()).expect("default serializes")
    );
}
