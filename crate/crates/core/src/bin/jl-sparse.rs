fn main() {
    std::process::exit(jl_sparse::experiments::cli::cli_main(std::env::args_os()));
}
