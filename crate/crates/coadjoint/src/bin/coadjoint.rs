fn main() {
    std::process::exit(coadjoint::cli::main_entry());
}
