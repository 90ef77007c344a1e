use clap::Parser;
use double_trine::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let (code, output) = run(&cli);
    if code == 0 {
        print!("{output}");
    } else {
        eprint!("{output}");
    }
    std::process::exit(code);
}
