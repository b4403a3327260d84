//! Running an SMT-LIB solver as a child process.

use std::io::Read;
use std::os::unix::process::CommandExt;
use std::path::PathBuf;
use std::process::{Child, Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use crate::SolverError;

/// How long a solver gets to exit after SIGTERM before it is killed.
const TERM_GRACE: Duration = Duration::from_millis(500);

#[derive(Debug)]
pub struct ProcessOutput {
    pub stdout: String,
    pub stderr: String,
    pub timed_out: bool,
}

fn terminate(child: &mut Child) {
    // The child leads its own process group, so helpers it forked are
    // signalled too.
    let group = -(child.id() as libc::pid_t);
    // SAFETY: `kill` has no memory-safety preconditions.
    unsafe {
        libc::kill(group, libc::SIGTERM);
    }
    let until = Instant::now() + TERM_GRACE;
    while Instant::now() < until {
        if let Ok(Some(_)) = child.try_wait() {
            return;
        }
        thread::sleep(Duration::from_millis(10));
    }
    // SAFETY: as above.
    unsafe {
        libc::kill(group, libc::SIGKILL);
    }
    let _ = child.wait();
}

fn drain<R: Read + Send + 'static>(r: Option<R>) -> thread::JoinHandle<String> {
    thread::spawn(move || {
        let mut s = String::new();
        if let Some(mut r) = r {
            let _ = r.read_to_string(&mut s);
        }
        s
    })
}

/// Runs `program args.. script_path`, terminating it at `deadline`.
pub fn run_solver(
    program: &PathBuf,
    args: &[String],
    script_path: &std::path::Path,
    deadline: Option<Instant>,
) -> Result<ProcessOutput, SolverError> {
    let mut child = Command::new(program)
        .process_group(0)
        .args(args)
        .arg(script_path)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| SolverError::Spawn {
            program: program.display().to_string(),
            source: e,
        })?;
    let out = drain(child.stdout.take());
    let err = drain(child.stderr.take());
    let mut timed_out = false;
    loop {
        match child.try_wait() {
            Ok(Some(_)) => break,
            Ok(None) => {}
            Err(e) => return Err(SolverError::Io(e)),
        }
        if deadline.is_some_and(|d| Instant::now() >= d) {
            timed_out = true;
            terminate(&mut child);
            break;
        }
        thread::sleep(Duration::from_millis(5));
    }
    Ok(ProcessOutput {
        stdout: out.join().unwrap_or_default(),
        stderr: err.join().unwrap_or_default(),
        timed_out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slow_process_is_terminated() {
        let dir = tempfile::tempdir().unwrap();
        let script = dir.path().join("s.sh");
        std::fs::write(&script, "sleep 30\n").unwrap();
        let start = Instant::now();
        let out = run_solver(
            &PathBuf::from("sh"),
            &[],
            &script,
            Some(Instant::now() + Duration::from_millis(200)),
        )
        .unwrap();
        assert!(out.timed_out);
        assert!(start.elapsed() < Duration::from_secs(5));
    }

    #[test]
    fn missing_program_is_reported() {
        let r = run_solver(
            &PathBuf::from("/nonexistent/solver"),
            &[],
            std::path::Path::new("x.smt2"),
            None,
        );
        assert!(matches!(r, Err(SolverError::Spawn { .. })));
    }
}
