//! Drive the command-line front end in-process: generate a chain file,
//! solve on it, and write a JSON envelope and CSV table.
//!
//!     cargo run --example cli_driver

use meetwalk::cli::{parse_config, run};

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let chain = dir.path().join("q3.chain");
    let json = dir.path().join("collide.json");
    let csv = dir.path().join("collide.csv");
    let commands = [
        format!("gen --family hypercube --n 3 -o {}", chain.display()),
        format!("analyze {} --hitting", chain.display()),
        format!(
            "collide {} --lx 1 --ly 1 --lz 0 --tie-rule weak --json {} --csv {}",
            chain.display(),
            json.display(),
            csv.display()
        ),
        "collide cycle --n 5 --ly -1".to_string(),
    ];
    for cmd in &commands {
        println!("$ meetwalk {cmd}");
        let args = std::iter::once("meetwalk").chain(cmd.split_whitespace());
        match parse_config(args, None).and_then(|c| run(&c)) {
            Ok(out) => print!("{}(exit {})\n\n", out.stdout, out.exit_code),
            Err(e) => println!("{e}\n(exit 2)\n"),
        }
    }
    println!("{}", std::fs::read_to_string(&csv).expect("csv written"));
}
