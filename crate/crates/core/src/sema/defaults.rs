//! Bodies for implicitly declared constructors and destructors.
//!
//! Generated members are appended to their class in already-checked form.
//! Base and field initializers that are missing from a constructor are
//! default-constructed by the lowering, so default constructors and
//! destructors get empty bodies here.

use super::check::Program;
use super::symbols::{FnKind, Synth};
use super::templates::class_decl_name;
use super::types::Type;
use crate::frontend::ast::*;

pub fn synthesize_defaults(p: &mut Program) {
    let syms = &p.symbols;
    for d in &mut p.ast.decls {
        let Decl::Class(c) = d else { continue };
        if !c.is_definition {
            continue;
        }
        let name = class_decl_name(c);
        let Some(info) = syms.classes.get(&name) else {
            continue;
        };
        for m in &info.methods {
            let f = syms.function(m);
            let Some(kind) = f.synthesized else { continue };
            let present = c
                .members
                .iter()
                .any(|mm| matches!(mm, Member::Method(fd) if fd.mangled.as_deref() == Some(m.as_str())));
            if present {
                continue;
            }
            let loc = c.loc.clone();
            let mut fd = FunctionDecl {
                name: f.name.clone(),
                qualifier: None,
                template_args: None,
                ret: TypeExpr::Void,
                params: vec![],
                inits: vec![],
                body: Some(vec![]),
                flags: FnFlags {
                    is_ctor: f.kind == FnKind::Ctor,
                    is_dtor: f.kind == FnKind::Dtor,
                    is_virtual: f.is_virtual,
                    synthesized: true,
                    ..Default::default()
                },
                loc: loc.clone(),
                mangled: Some(m.clone()),
            };
            if kind == Synth::CopyCtor {
                copy_ctor_body(syms, &name, &mut fd, &loc);
            }
            c.members.push(Member::Method(fd));
        }
    }
}

fn other(class: &str, loc: &SourceLoc) -> Expr {
    Expr::typed(
        ExprKind::Ident {
            name: "other".into(),
            args: None,
            res: Some(Res::Local),
        },
        loc.clone(),
        Type::class(class),
    )
}

fn member(base: Expr, arrow: bool, name: &str, owner: &str, ty: Type, loc: &SourceLoc) -> Expr {
    Expr::typed(
        ExprKind::Member {
            base: Box::new(base),
            arrow,
            name: name.into(),
            owner: Some(owner.into()),
        },
        loc.clone(),
        ty,
    )
}

/// Member-wise copy: bases and class fields through their copy
/// constructors, scalars by initialization and arrays element by element.
fn copy_ctor_body(syms: &super::symbols::SymbolTable, class: &str, fd: &mut FunctionDecl, loc: &SourceLoc) {
    fd.params.push(Param {
        ty: TypeExpr::Reference(Box::new(TypeExpr::Const(Box::new(TypeExpr::named(class))))),
        name: Some("other".into()),
        loc: loc.clone(),
    });
    let info = syms.class(class);
    let mut bases: Vec<String> = info.bases.iter().map(|b| b.name.clone()).collect();
    for b in syms.all_bases(class) {
        let through_virtual = syms
            .base_path(class, &b)
            .is_some_and(|p| p.iter().any(|e| e.2));
        if through_virtual && !bases.contains(&b) {
            bases.push(b);
        }
    }
    for b in bases {
        let arg = Expr::typed(
            ExprKind::Cast {
                target: TypeExpr::named(b.clone()),
                expr: Box::new(other(class, loc)),
                implicit: true,
            },
            loc.clone(),
            Type::class(b.clone()),
        );
        fd.inits.push(MemberInit {
            target: TypeExpr::named(b.clone()),
            args: vec![arg],
            loc: loc.clone(),
            ctor: syms.copy_ctor(&b).map(|f| f.mangled.clone()),
        });
    }
    let body = fd.body.as_mut().unwrap();
    for f in &info.fields {
        let src = member(other(class, loc), false, &f.name, class, f.ty.clone(), loc);
        match &f.ty {
            Type::Array(..) => {
                let this = Expr::typed(ExprKind::This, loc.clone(), Type::ptr(Type::class(class)));
                let dst = member(this, true, &f.name, class, f.ty.clone(), loc);
                copy_array(dst, src, &f.ty, body, loc);
            }
            Type::Class(fc) => fd.inits.push(MemberInit {
                target: TypeExpr::named(f.name.clone()),
                args: vec![src],
                loc: loc.clone(),
                ctor: syms.copy_ctor(fc).map(|f| f.mangled.clone()),
            }),
            _ => fd.inits.push(MemberInit {
                target: TypeExpr::named(f.name.clone()),
                args: vec![src],
                loc: loc.clone(),
                ctor: None,
            }),
        }
    }
}

fn copy_array(dst: Expr, src: Expr, ty: &Type, out: &mut Vec<Stmt>, loc: &SourceLoc) {
    let Type::Array(elem, n) = ty else {
        out.push(Stmt {
            kind: StmtKind::Expr(Expr::typed(
                ExprKind::Assign(None, Box::new(dst), Box::new(src)),
                loc.clone(),
                ty.clone(),
            )),
            loc: loc.clone(),
        });
        return;
    };
    for i in 0..*n {
        let idx = Expr::typed(ExprKind::IntLit(i as u64), loc.clone(), Type::Int);
        let d = Expr::typed(
            ExprKind::Index(Box::new(dst.clone()), Box::new(idx.clone())),
            loc.clone(),
            (**elem).clone(),
        );
        let s = Expr::typed(
            ExprKind::Index(Box::new(src.clone()), Box::new(idx)),
            loc.clone(),
            (**elem).clone(),
        );
        copy_array(d, s, elem, out, loc);
    }
}
