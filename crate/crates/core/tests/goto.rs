use cxxbmc_core::frontend::parse_source;
use cxxbmc_core::goto::{dump, lower, CheckOptions, GotoProgram};
use cxxbmc_core::object_model::ObjectModel;
use cxxbmc_core::sema::{monomorphize, synthesize_defaults, typecheck};

const PENGUIN: &str = "class Bird {
  public:
  virtual int doit(void) { return 21; }
};

class Penguin: public Bird {
  public:
  int doit(void) override { return 42; }
};
int main(){
  Bird *p = new Penguin();
  assert(p->doit() == 42);
  delete p;
  return 0;
}
";

fn goto(src: &str, opts: CheckOptions) -> Result<GotoProgram, String> {
    let ast = parse_source("t.cpp", src).map_err(|d| d.to_string())?;
    let p = typecheck(ast).map_err(|d| d.to_string())?;
    let mut p = monomorphize(p);
    synthesize_defaults(&mut p);
    let om = ObjectModel::build(&p.symbols).map_err(|d| d.to_string())?;
    lower(&p, &om, opts).map_err(|d| d.to_string())
}

#[test]
fn penguin_dump() {
    let g = goto(PENGUIN, CheckOptions::default()).unwrap();
    let text = dump::program_text(&g);
    println!("{text}");
    assert!(text.contains(
        "thunk::Penguin::doit(Bird*):
  int return_value;
  return_value = Penguin::doit((Penguin*)this)
  RETURN: return_value
  END_FUNCTION
"
    ));
    assert!(text.contains(
        "Penguin::doit(Penguin*):
  RETURN: 42
  END_FUNCTION
"
    ));
    let main = text.split("main:").nth(1).unwrap();
    assert!(main.contains("return_value = *p->Bird@vptr->doit(p) // via Bird@Bird | Bird@Penguin"), "{main}");
}
