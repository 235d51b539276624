//! CPU-time sources backing the solver's cooperative limit checks.

use tcsp_core::TimeSource;

fn thread_cpu_ns() -> u64 {
    let mut ts = libc::timespec { tv_sec: 0, tv_nsec: 0 };
    let rc = unsafe { libc::clock_gettime(libc::CLOCK_THREAD_CPUTIME_ID, &mut ts) };
    assert_eq!(rc, 0, "clock_gettime(CLOCK_THREAD_CPUTIME_ID) failed");
    ts.tv_sec as u64 * 1_000_000_000 + ts.tv_nsec as u64
}

/// CPU time consumed by the calling thread since construction. Solves are
/// single-threaded, so this measures exactly the solve call even when a
/// campaign runs workers in parallel.
pub struct ThreadCpuClock {
    start_ns: u64,
}

impl ThreadCpuClock {
    pub fn start() -> ThreadCpuClock {
        ThreadCpuClock { start_ns: thread_cpu_ns() }
    }
}

impl TimeSource for ThreadCpuClock {
    fn elapsed_ms(&mut self) -> u64 {
        (thread_cpu_ns() - self.start_ns) / 1_000_000
    }
}
