//! Run the `sweep` command in-process over a coarse grid and print the CSV.

use std::io::Write;

fn main() {
    let spec = std::env::temp_dir().join("papm_sweep_example.json");
    std::fs::write(
        &spec,
        r#"{"n": 2, "kind": "conformal_product", "u": "x1 + x3^2"}"#,
    )
    .expect("temp dir is writable");
    let args = [
        "papm",
        "sweep",
        spec.to_str().unwrap(),
        "--lambda-range",
        "-1:1",
        "--mu-range",
        "-1:1",
        "--steps",
        "5",
    ];
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = papm::cli::run(args, &mut out, &mut err);
    std::io::stdout().write_all(&out).unwrap();
    std::io::stderr().write_all(&err).unwrap();
    println!("exit code {code}");
}
