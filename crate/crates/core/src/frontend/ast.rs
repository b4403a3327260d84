//! Syntax tree of a MiniC++ translation unit.
//!
//! The same tree is used before and after semantic analysis: the checker
//! fills the `ty`/`res` annotation slots, inserts implicit casts and appends
//! template instances. Structural equality ignores source locations and
//! assertion texts (see [`SourceLoc`] and [`Meta`]).

use std::fmt;
use std::rc::Rc;

use crate::sema::types::Type;

#[derive(Clone, Debug, Eq)]
pub struct SourceLoc {
    pub file: Rc<str>,
    pub line: u32,
    pub column: u32,
}

impl SourceLoc {
    pub fn new(file: Rc<str>, line: u32, column: u32) -> Self {
        SourceLoc { file, line, column }
    }

    /// Location used for compiler-generated nodes.
    pub fn builtin() -> Self {
        SourceLoc::new(Rc::from("<builtin>"), 1, 1)
    }

    pub fn same_position(&self, other: &SourceLoc) -> bool {
        self.file == other.file && self.line == other.line && self.column == other.column
    }
}

/// Locations never take part in structural comparison.
impl PartialEq for SourceLoc {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl fmt::Display for SourceLoc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

/// Metadata carried along a node but ignored by structural comparison.
#[derive(Clone, Debug, Default)]
pub struct Meta<T>(pub T);

impl<T> PartialEq for Meta<T> {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Ast {
    pub decls: Vec<Decl>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TypeExpr {
    Int,
    Bool,
    Void,
    Named {
        name: String,
        args: Option<Vec<TemplateArg>>,
    },
    Pointer(Box<TypeExpr>),
    Reference(Box<TypeExpr>),
    Const(Box<TypeExpr>),
    Array(Box<TypeExpr>, Box<Expr>),
}

impl TypeExpr {
    pub fn named(name: impl Into<String>) -> TypeExpr {
        TypeExpr::Named {
            name: name.into(),
            args: None,
        }
    }

    /// Syntax for a semantic type.
    pub fn from_type(t: &Type) -> TypeExpr {
        match t {
            Type::Int => TypeExpr::Int,
            Type::Bool => TypeExpr::Bool,
            Type::Void | Type::Null => TypeExpr::Void,
            Type::Class(n) => TypeExpr::named(n.clone()),
            Type::Pointer(t) => TypeExpr::Pointer(Box::new(TypeExpr::from_type(t))),
            Type::Reference(t) => TypeExpr::Reference(Box::new(TypeExpr::from_type(t))),
            Type::Array(t, n) => TypeExpr::Array(
                Box::new(TypeExpr::from_type(t)),
                Box::new(Expr::new(ExprKind::IntLit(*n as u64), SourceLoc::builtin())),
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TemplateArg {
    Type(TypeExpr),
    Value(Expr),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TemplateParamKind {
    Type,
    Int,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TemplateParam {
    pub kind: TemplateParamKind,
    pub name: String,
    pub default: Option<TemplateArg>,
    pub loc: SourceLoc,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Decl {
    Class(ClassDecl),
    Function(FunctionDecl),
    Vars(Vec<VarDecl>),
    Typedef(TypedefDecl),
    Template(TemplateDecl),
}

impl Decl {
    pub fn loc(&self) -> &SourceLoc {
        match self {
            Decl::Class(c) => &c.loc,
            Decl::Function(f) => &f.loc,
            Decl::Vars(v) => &v[0].loc,
            Decl::Typedef(t) => &t.loc,
            Decl::Template(t) => &t.loc,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TemplateDecl {
    /// Empty for an explicit specialization (`template<>`).
    pub params: Vec<TemplateParam>,
    pub body: Box<Decl>,
    pub loc: SourceLoc,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassDecl {
    pub name: String,
    /// Arguments of an explicit specialization `X<5>`.
    pub spec_args: Option<Vec<TemplateArg>>,
    pub is_struct: bool,
    /// False for a forward declaration `class X;`.
    pub is_definition: bool,
    pub bases: Vec<BaseSpec>,
    pub members: Vec<Member>,
    pub loc: SourceLoc,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BaseSpec {
    pub ty: TypeExpr,
    pub is_virtual: bool,
    pub loc: SourceLoc,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Member {
    Field(VarDecl),
    Method(FunctionDecl),
    Friend(Box<Decl>),
    Typedef(TypedefDecl),
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct FnFlags {
    pub is_virtual: bool,
    pub is_override: bool,
    pub is_pure: bool,
    pub is_const: bool,
    pub is_ctor: bool,
    pub is_dtor: bool,
    /// Generated by the checker rather than written by the user.
    pub synthesized: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FunctionDecl {
    pub name: String,
    /// Class of an out-of-line member definition `C::name`.
    pub qualifier: Option<String>,
    /// Arguments of an explicit specialization `f<int>`.
    pub template_args: Option<Vec<TemplateArg>>,
    pub ret: TypeExpr,
    pub params: Vec<Param>,
    pub inits: Vec<MemberInit>,
    pub body: Option<Vec<Stmt>>,
    pub flags: FnFlags,
    pub loc: SourceLoc,
    /// Mangled name, filled by the checker.
    pub mangled: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    pub ty: TypeExpr,
    pub name: Option<String>,
    pub loc: SourceLoc,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MemberInit {
    /// A field name or a base class.
    pub target: TypeExpr,
    pub args: Vec<Expr>,
    pub loc: SourceLoc,
    /// Constructor chosen for class-typed targets, filled by the checker.
    pub ctor: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VarDecl {
    pub ty: TypeExpr,
    pub name: String,
    pub init: Option<Init>,
    pub loc: SourceLoc,
    /// Resolved type, filled by the checker.
    pub sem_ty: Option<Type>,
    /// Constructor chosen for class-typed variables.
    pub ctor: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Init {
    Expr(Expr),
    Ctor(Vec<Expr>),
    List(Vec<Expr>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TypedefDecl {
    pub ty: TypeExpr,
    pub name: String,
    pub loc: SourceLoc,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub loc: SourceLoc,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StmtKind {
    Expr(Expr),
    Block(Vec<Stmt>),
    Decl(Vec<VarDecl>),
    If(Expr, Box<Stmt>, Option<Box<Stmt>>),
    While(Expr, Box<Stmt>),
    DoWhile(Box<Stmt>, Expr),
    For {
        init: Option<Box<Stmt>>,
        cond: Option<Expr>,
        step: Option<Expr>,
        body: Box<Stmt>,
    },
    Return(Option<Expr>),
    Break,
    Continue,
    Assert {
        cond: Expr,
        text: Meta<String>,
    },
    Assume(Expr),
    Empty,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnOp {
    Neg,
    Not,
    Deref,
    AddrOf,
    PreInc,
    PreDec,
    PostInc,
    PostDec,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// Binding strength; higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::Rem => 6,
        }
    }

    pub fn is_arith(self) -> bool {
        matches!(self, BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Rem)
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge
        )
    }
}

/// What an identifier refers to.
#[derive(Clone, Debug, PartialEq)]
pub enum Res {
    Local,
    Global,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Builtin {
    NondetInt,
    NondetBool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CallRes {
    Function(String),
    /// Method call; `virtual_dispatch` is false for qualified calls and
    /// non-virtual methods.
    Method {
        mangled: String,
        class: String,
        virtual_dispatch: bool,
    },
    Builtin(Builtin),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub loc: SourceLoc,
    pub ty: Option<Type>,
}

impl Expr {
    pub fn new(kind: ExprKind, loc: SourceLoc) -> Self {
        Expr {
            kind,
            loc,
            ty: None,
        }
    }

    pub fn typed(kind: ExprKind, loc: SourceLoc, ty: Type) -> Self {
        Expr {
            kind,
            loc,
            ty: Some(ty),
        }
    }

    pub fn ty(&self) -> &Type {
        self.ty.as_ref().expect("expression has not been type-checked")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    IntLit(u64),
    BoolLit(bool),
    Null,
    This,
    Ident {
        name: String,
        args: Option<Vec<TemplateArg>>,
        res: Option<Res>,
    },
    /// `Class::name`, only as a callee.
    Scoped {
        scope: TypeExpr,
        name: String,
    },
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Assign(Option<BinOp>, Box<Expr>, Box<Expr>),
    Index(Box<Expr>, Box<Expr>),
    Member {
        base: Box<Expr>,
        arrow: bool,
        name: String,
        /// Class declaring the field, filled by the checker.
        owner: Option<String>,
    },
    Call {
        callee: Box<Expr>,
        args: Vec<Expr>,
        res: Option<CallRes>,
    },
    New {
        ty: TypeExpr,
        args: Vec<Expr>,
        array_len: Option<Box<Expr>>,
        ctor: Option<String>,
    },
    Delete {
        expr: Box<Expr>,
        array: bool,
    },
    Cast {
        target: TypeExpr,
        expr: Box<Expr>,
        implicit: bool,
    },
}
