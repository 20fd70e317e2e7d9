fn main() {
    let argv: Vec<String> = std::env::args().collect();
    std::process::exit(llmhpo::cli::dispatch(&argv));
}
