use clap::Parser;

use subrig::cli::{run, Command};

fn main() {
    let cmd = Command::parse();
    let out = run(&cmd);
    print!("{}", out.render(cmd.text));
    std::process::exit(out.status);
}
