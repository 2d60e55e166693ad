fn main() {
    std::process::exit(pt_spectra::cli::main_entry());
}
