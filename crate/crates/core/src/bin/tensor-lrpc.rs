fn main() {
    std::process::exit(tensor_lrpc::cli::run(std::env::args_os()));
}
