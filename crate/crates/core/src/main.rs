fn main() {
    std::process::exit(bt_coeff::cli::run(std::env::args_os()) as i32);
}
