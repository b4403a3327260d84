//! Source text to GOTO program.

use crate::diag::Diagnostic;
use crate::frontend::parse_source;
use crate::goto::{lower, CheckOptions, GotoProgram};
use crate::object_model::ObjectModel;
use crate::sema::{monomorphize, synthesize_defaults, typecheck, Program};

pub struct Compiled {
    pub program: Program,
    pub model: ObjectModel,
    pub goto: GotoProgram,
}

pub fn compile(file: &str, src: &str, opts: CheckOptions) -> Result<Compiled, Diagnostic> {
    let ast = parse_source(file, src)?;
    let program = typecheck(ast)?;
    let mut program = monomorphize(program);
    synthesize_defaults(&mut program);
    let model = ObjectModel::build(&program.symbols)?;
    let goto = lower(&program, &model, opts)?;
    Ok(Compiled { program, model, goto })
}

/// Runs `f` on a thread with a large stack; deep ASTs recurse deeply.
pub fn with_big_stack<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> T {
    std::thread::Builder::new()
        .stack_size(256 << 20)
        .spawn(f)
        .expect("spawn worker thread")
        .join()
        .unwrap_or_else(|e| std::panic::resume_unwind(e))
}
