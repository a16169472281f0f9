fn main() {
    // Restore default SIGPIPE handling so `factdb ... | head` exits quietly
    // instead of panicking when the reader closes the pipe.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    std::process::exit(factdb_engine::cli::run());
}
