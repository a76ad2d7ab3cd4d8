fn main() {
    let argv: Vec<String> = std::env::args().collect();
    std::process::exit(stripgain_cli::main_with(&argv));
}
