//! Seeded generator of loop-free, deterministic programs.
//!
//! Programs mix a small class hierarchy with virtual dispatch, heap
//! objects, arrays, free functions, branches and assertions. Every local is
//! initialized and there is no nondeterminism, so a single concrete run
//! decides every property.

use std::fmt::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
struct Method {
    name: String,
    /// Class that introduced the method.
    origin: usize,
}

#[derive(Clone, Debug)]
struct Class {
    name: String,
    bases: Vec<(usize, bool)>,
    field: String,
    /// Methods introduced here.
    methods: Vec<Method>,
    /// Introduced or inherited methods overridden here.
    overrides: Vec<String>,
    ctor: Option<i64>,
    virtual_dtor: bool,
}

struct Ptr {
    name: String,
    /// Static type.
    class: usize,
}

struct Gen {
    rng: ChaCha8Rng,
    classes: Vec<Class>,
    funcs: Vec<String>,
    out: String,
}

const LARGE: [i64; 4] = [2147483647, 2147483600, 1 << 30, 65536];

impl Gen {
    fn ancestors(&self, c: usize) -> Vec<usize> {
        let mut out = vec![c];
        let mut i = 0;
        while i < out.len() {
            for &(b, _) in &self.classes[out[i]].bases {
                if !out.contains(&b) {
                    out.push(b);
                }
            }
            i += 1;
        }
        out
    }

    fn visible_methods(&self, c: usize) -> Vec<String> {
        self.ancestors(c)
            .iter()
            .flat_map(|&a| self.classes[a].methods.iter().map(|m| m.name.clone()))
            .collect()
    }

    fn visible_fields(&self, c: usize) -> Vec<String> {
        self.ancestors(c).iter().map(|&a| self.classes[a].field.clone()).collect()
    }

    fn literal(&mut self) -> String {
        if self.rng.gen_ratio(1, 8) {
            LARGE.choose(&mut self.rng).unwrap().to_string()
        } else {
            self.rng.gen_range(0..20).to_string()
        }
    }

    fn int_expr(&mut self, vars: &[String], ptrs: &[Ptr], depth: u32) -> String {
        let leaf = depth == 0 || self.rng.gen_ratio(1, 3);
        if leaf {
            return match self.rng.gen_range(0..4) {
                0 | 1 if !vars.is_empty() => vars.choose(&mut self.rng).unwrap().clone(),
                2 if !ptrs.is_empty() => {
                    let p = ptrs.choose(&mut self.rng).unwrap();
                    let f = self.visible_fields(p.class);
                    format!("{}->{}", p.name, f.choose(&mut self.rng).unwrap())
                }
                _ => self.literal(),
            };
        }
        match self.rng.gen_range(0..10) {
            0..=5 => {
                let op = ["+", "-", "*", "/", "%", "+"].choose(&mut self.rng).unwrap();
                let a = self.int_expr(vars, ptrs, depth - 1);
                let b = self.int_expr(vars, ptrs, depth - 1);
                format!("({a} {op} {b})")
            }
            6 => format!("-({})", self.int_expr(vars, ptrs, depth - 1)),
            7 if !ptrs.is_empty() => {
                let p = ptrs.choose(&mut self.rng).unwrap();
                let ms = self.visible_methods(p.class);
                match ms.choose(&mut self.rng) {
                    Some(m) => {
                        let m = m.clone();
                        let name = p.name.clone();
                        format!("{name}->{m}({})", self.int_expr(vars, ptrs, depth - 1))
                    }
                    None => self.literal(),
                }
            }
            8 if !self.funcs.is_empty() => {
                let f = self.funcs.choose(&mut self.rng).unwrap().clone();
                let a = self.int_expr(vars, ptrs, depth - 1);
                let b = self.int_expr(vars, ptrs, depth - 1);
                format!("{f}({a}, {b})")
            }
            _ => format!("arr[{}]", self.index(vars)),
        }
    }

    fn index(&mut self, vars: &[String]) -> String {
        if self.rng.gen_ratio(1, 4) && !vars.is_empty() {
            format!("{} % 5", vars.choose(&mut self.rng).unwrap())
        } else {
            self.rng.gen_range(0..5).to_string()
        }
    }

    fn cond(&mut self, vars: &[String], ptrs: &[Ptr], depth: u32) -> String {
        match self.rng.gen_range(0..6) {
            0 if depth > 0 => {
                let a = self.cond(vars, ptrs, depth - 1);
                let b = self.cond(vars, ptrs, depth - 1);
                let op = if self.rng.gen() { "&&" } else { "||" };
                format!("({a} {op} {b})")
            }
            1 if depth > 0 => format!("!({})", self.cond(vars, ptrs, depth - 1)),
            _ => {
                let op = ["==", "!=", "<", "<=", ">", ">="].choose(&mut self.rng).unwrap();
                let a = self.int_expr(vars, ptrs, 2);
                let b = self.int_expr(vars, ptrs, 1);
                format!("{a} {op} {b}")
            }
        }
    }

    fn hierarchy(&mut self) {
        let n = self.rng.gen_range(1..=4);
        let diamond = n == 4 && self.rng.gen_ratio(1, 3);
        for i in 0..n {
            let name = format!("C{i}");
            let mut bases = Vec::new();
            if diamond {
                match i {
                    1 | 2 => bases.push((0, true)),
                    3 => bases.extend([(1, false), (2, false)]),
                    _ => {}
                }
            } else if i > 0 && self.rng.gen_ratio(3, 4) {
                bases.push((self.rng.gen_range(0..i), false));
                // A second, unrelated root base.
                let roots: Vec<usize> = (0..i)
                    .filter(|&r| self.classes[r].bases.is_empty() && !self.ancestors(bases[0].0).contains(&r))
                    .collect();
                if let (true, Some(&r)) = (self.rng.gen_ratio(1, 3), roots.choose(&mut self.rng)) {
                    bases.push((r, false));
                }
            }
            let mut c = Class {
                name: name.clone(),
                bases,
                field: format!("f{i}"),
                methods: vec![],
                overrides: vec![],
                ctor: self.rng.gen_ratio(1, 2).then(|| self.rng.gen_range(-5..50)),
                virtual_dtor: false,
            };
            if c.bases.is_empty() {
                c.virtual_dtor = self.rng.gen_ratio(2, 3);
            }
            let fresh = if c.bases.is_empty() { self.rng.gen_range(1..=2) } else { self.rng.gen_range(0..=1) };
            for k in 0..fresh {
                c.methods.push(Method {
                    name: format!("m{i}_{k}"),
                    origin: i,
                });
            }
            self.classes.push(c);
            if !(diamond && (i == 1 || i == 2)) {
                let inherited: Vec<String> = self
                    .ancestors(i)
                    .iter()
                    .filter(|&&a| a != i)
                    .flat_map(|&a| self.classes[a].methods.iter().map(|m| m.name.clone()))
                    .collect();
                for m in inherited {
                    if self.rng.gen_ratio(1, 2) {
                        self.classes[i].overrides.push(m);
                    }
                }
            }
        }
    }

    fn method_body(&mut self, c: usize) -> String {
        let fields = self.visible_fields(c);
        let vars = vec!["v".to_string()];
        let mut e = self.int_expr(&vars, &[], 1);
        if self.rng.gen_ratio(2, 3) {
            e = format!("{e} + {}", fields.choose(&mut self.rng).unwrap());
        }
        format!("return {e};")
    }

    fn emit_classes(&mut self) {
        for i in 0..self.classes.len() {
            let c = self.classes[i].clone();
            let mut head = format!("struct {}", c.name);
            if !c.bases.is_empty() {
                let bs: Vec<String> = c
                    .bases
                    .iter()
                    .map(|(b, v)| format!("{}{}", if *v { "virtual " } else { "" }, self.classes[*b].name))
                    .collect();
                write!(head, " : {}", bs.join(", ")).unwrap();
            }
            writeln!(self.out, "{head} {{").unwrap();
            writeln!(self.out, "  int {};", c.field).unwrap();
            if let Some(v) = c.ctor {
                writeln!(self.out, "  {}() {{ {} = {v}; }}", c.name, c.field).unwrap();
            }
            if c.virtual_dtor {
                writeln!(self.out, "  virtual ~{}() {{}}", c.name).unwrap();
            }
            for m in &c.methods {
                debug_assert_eq!(m.origin, i);
                let body = self.method_body(i);
                writeln!(self.out, "  virtual int {}(int v) {{ {body} }}", m.name).unwrap();
            }
            for m in &c.overrides {
                let body = self.method_body(i);
                writeln!(self.out, "  int {m}(int v) override {{ {body} }}").unwrap();
            }
            writeln!(self.out, "}};\n").unwrap();
        }
    }

    fn emit_functions(&mut self) {
        for k in 0..self.rng.gen_range(0..=2) {
            let name = format!("g{k}");
            let vars = vec!["a".to_string(), "b".to_string()];
            let c = self.cond(&vars, &[], 1);
            let e1 = self.int_expr(&vars, &[], 2);
            let e2 = self.int_expr(&vars, &[], 2);
            writeln!(
                self.out,
                "int {name}(int a, int b) {{\n  if ({c}) return {e1};\n  return {e2};\n}}\n"
            )
            .unwrap();
            self.funcs.push(name);
        }
    }

    fn block(&mut self, vars: &mut Vec<String>, ptrs: &[Ptr], depth: u32, indent: &str, budget: &mut u32) -> String {
        let mut s = String::new();
        let n = self.rng.gen_range(1..=4);
        for _ in 0..n {
            if *budget == 0 {
                break;
            }
            *budget -= 1;
            match self.rng.gen_range(0..10) {
                0 | 1 => {
                    let name = format!("x{}", vars.len());
                    let e = self.int_expr(vars, ptrs, 2);
                    writeln!(s, "{indent}int {name} = {e};").unwrap();
                    vars.push(name);
                }
                2 | 3 if !vars.is_empty() => {
                    let v = vars.choose(&mut self.rng).unwrap().clone();
                    let e = self.int_expr(vars, ptrs, 2);
                    writeln!(s, "{indent}{v} = {e};").unwrap();
                }
                4 => {
                    let i = self.index(vars);
                    let e = self.int_expr(vars, ptrs, 1);
                    writeln!(s, "{indent}arr[{i}] = {e};").unwrap();
                }
                5 if !ptrs.is_empty() => {
                    let p = ptrs.choose(&mut self.rng).unwrap();
                    let f = self.visible_fields(p.class);
                    let f = f.choose(&mut self.rng).unwrap().clone();
                    let name = p.name.clone();
                    let e = self.int_expr(vars, ptrs, 1);
                    writeln!(s, "{indent}{name}->{f} = {e};").unwrap();
                }
                6 | 7 if depth > 0 => {
                    let c = self.cond(vars, ptrs, 1);
                    let inner = format!("{indent}  ");
                    let mut scope = vars.clone();
                    let t = self.block(&mut scope, ptrs, depth - 1, &inner, budget);
                    write!(s, "{indent}if ({c}) {{\n{t}{indent}}}").unwrap();
                    if self.rng.gen() {
                        let mut scope = vars.clone();
                        let e = self.block(&mut scope, ptrs, depth - 1, &inner, budget);
                        write!(s, " else {{\n{e}{indent}}}").unwrap();
                    }
                    s.push('\n');
                }
                _ => {
                    let c = self.cond(vars, ptrs, 1);
                    writeln!(s, "{indent}assert({c});").unwrap();
                }
            }
        }
        s
    }

    fn main(&mut self) {
        let mut body = String::new();
        for i in 0..5 {
            writeln!(body, "  arr[{i}] = {};", self.rng.gen_range(-3..10)).unwrap();
        }
        let mut ptrs = Vec::new();
        for k in 0..self.rng.gen_range(1..=3) {
            let dynamic = self.rng.gen_range(0..self.classes.len());
            let anc = self.ancestors(dynamic);
            let stat = *anc.choose(&mut self.rng).unwrap();
            let name = format!("p{k}");
            writeln!(body, "  {}* {name} = new {}();", self.classes[stat].name, self.classes[dynamic].name).unwrap();
            ptrs.push(Ptr { name, class: stat });
        }
        let mut vars = Vec::new();
        let mut budget = 12;
        body.push_str(&self.block(&mut vars, &ptrs, 2, "  ", &mut budget));
        if self.rng.gen_ratio(1, 6) {
            // Use after free or a null dereference.
            let p = &ptrs[0];
            let f = self.visible_fields(p.class)[0].clone();
            if self.rng.gen() {
                writeln!(body, "  delete {};\n  {}->{f} = 1;", p.name, p.name).unwrap();
            } else {
                writeln!(body, "  {} = 0;\n  {}->{f} = 1;", p.name, p.name).unwrap();
            }
        } else {
            for p in &ptrs {
                writeln!(body, "  delete {};", p.name).unwrap();
            }
        }
        writeln!(self.out, "int main() {{\n{body}  return 0;\n}}").unwrap();
    }
}

/// Program text for `seed`.
pub fn program(seed: u64) -> String {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        classes: vec![],
        funcs: vec![],
        out: String::new(),
    };
    g.out.push_str("int arr[5];\n\n");
    g.hierarchy();
    g.emit_classes();
    g.emit_functions();
    g.main();
    g.out
}
