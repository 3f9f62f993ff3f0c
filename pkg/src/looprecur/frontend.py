"""MiniC frontend: lexing, parsing, name resolution, type checking, inlining.

The accepted language is a small C subset: fixed-width integer scalars,
assignments, if/else, while/for/do-while, break/continue/return, assert and
assume, printf as a no-op marker, nondet_* input intrinsics, and
non-recursive functions (inlined before analysis). Pointers, arrays,
structs, goto, switch, floats, and recursion are rejected with diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass

from .nodes import (
    ALL_TYPES,
    BOOL,
    I8,
    I16,
    I32,
    I64,
    NONDET_NAMES,
    U8,
    U16,
    U32,
    U64,
    Assert,
    Assign,
    Assume,
    Binary,
    Block,
    Break,
    Call,
    Cast,
    Continue,
    Decl,
    DoWhile,
    Expr,
    ExprStmt,
    For,
    Function,
    If,
    IntType,
    Literal,
    Loc,
    Loop,
    Nondet,
    Noop,
    OpAssign,
    Param,
    Program,
    Return,
    Stmt,
    Unary,
    Var,
    While,
    all_exprs,
    child_stmts,
    clone,
    clone_program,
    iter_exprs,
    iter_stmts,
    stmt_exprs,
)


@dataclass
class Diagnostic:
    file: str
    line: int
    col: int
    severity: str
    message: str

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.col}: {self.severity}: {self.message}"


class FrontendError(Exception):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("\n".join(str(d) for d in diagnostics))


# ===== TYPE ALGEBRA =====


def promote(t: IntType) -> IntType:
    """Integer promotion: anything narrower than int becomes int."""
    return I32 if t.width < 32 else t


def usual(a: IntType, b: IntType) -> IntType:
    """Usual arithmetic conversions over the promoted operand types."""
    a, b = promote(a), promote(b)
    if a == b:
        return a
    if a.signed == b.signed:
        return a if a.width >= b.width else b
    s, u = (a, b) if a.signed else (b, a)
    if u.width >= s.width:
        return u
    return s  # the wider signed type represents every value of the narrower unsigned


# ===== LEXER =====

_KEYWORDS = {
    "int", "unsigned", "signed", "char", "short", "long", "void", "_Bool", "bool",
    "if", "else", "while", "for", "do", "break", "continue", "return",
    "true", "false", "extern",
}

_UNSUPPORTED_KEYWORDS = {
    "struct": "struct types", "union": "union types", "enum": "enum types",
    "typedef": "typedef", "goto": "goto", "switch": "switch statements",
    "float": "floating-point types", "double": "floating-point types",
    "static": "storage-class specifiers", "const": "type qualifiers",
    "volatile": "type qualifiers", "sizeof": "sizeof", "register": "storage-class specifiers",
    "auto": "storage-class specifiers", "case": "switch statements",
    "default": "switch statements", "inline": "function specifiers",
}

_PUNCTS = [
    "<<=", ">>=",
    "==", "!=", "<=", ">=", "&&", "||", "<<", ">>",
    "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "++", "--",
    "+", "-", "*", "/", "%", "<", ">", "=", "!", "~", "&", "|", "^",
    "(", ")", "{", "}", ";", ",", "[", "]", "?", ":", ".",
]

_ESCAPES = {"n": 10, "t": 9, "r": 13, "0": 0, "\\": 92, "'": 39, '"': 34, "a": 7, "b": 8, "f": 12, "v": 11}


@dataclass
class Token:
    kind: str  # ident num char str punct eof
    text: str
    line: int
    col: int
    pos: int
    end: int
    value: int = 0
    ty: IntType = I32


class _Lexer:
    def __init__(self, src: str, filename: str):
        self.src = src
        self.filename = filename
        self.pos = 0
        self.line = 1
        self.col = 1

    def error(self, msg: str):
        raise FrontendError([Diagnostic(self.filename, self.line, self.col, "error", msg)])

    def _advance(self, n: int):
        for _ in range(n):
            if self.src[self.pos] == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
            self.pos += 1

    def tokens(self) -> list[Token]:
        toks = []
        src, n = self.src, len(self.src)
        while self.pos < n:
            c = src[self.pos]
            if c in " \t\r\n":
                self._advance(1)
                continue
            if c == "#":
                ls = src.rfind("\n", 0, self.pos) + 1
                if src[ls:self.pos].strip():
                    self.error("stray '#' in program")
                # already-preprocessed input: line markers and directives pass through
                while self.pos < n and src[self.pos] != "\n":
                    self._advance(1)
                continue
            if src.startswith("//", self.pos):
                while self.pos < n and src[self.pos] != "\n":
                    self._advance(1)
                continue
            if src.startswith("/*", self.pos):
                end = src.find("*/", self.pos + 2)
                if end < 0:
                    self.error("unterminated comment")
                self._advance(end + 2 - self.pos)
                continue
            line, col, pos = self.line, self.col, self.pos
            if c.isalpha() or c == "_":
                j = self.pos
                while j < n and (src[j].isalnum() or src[j] == "_"):
                    j += 1
                text = src[pos:j]
                self._advance(j - self.pos)
                toks.append(Token("ident", text, line, col, pos, j))
                continue
            if c.isdigit():
                toks.append(self._number(line, col))
                continue
            if c == "'":
                toks.append(self._char(line, col))
                continue
            if c == '"':
                toks.append(self._string(line, col))
                continue
            for p in _PUNCTS:
                if src.startswith(p, self.pos):
                    self._advance(len(p))
                    toks.append(Token("punct", p, line, col, pos, pos + len(p)))
                    break
            else:
                self.error(f"unexpected character {c!r}")
        toks.append(Token("eof", "", self.line, self.col, self.pos, self.pos))
        return toks

    def _number(self, line: int, col: int) -> Token:
        src, n, start = self.src, len(self.src), self.pos
        is_hex = src.startswith(("0x", "0X"), self.pos)
        j = self.pos + 2 if is_hex else self.pos
        digits = "0123456789abcdefABCDEF" if is_hex else "0123456789"
        while j < n and src[j] in digits:
            j += 1
        body = src[start:j]
        if is_hex and j == start + 2:
            self.error("malformed hex literal")
        k = j
        while k < n and src[k] in "uUlL":
            k += 1
        suffix = src[j:k].lower()
        if suffix not in ("", "u", "l", "ll", "ul", "ull", "lu", "llu"):
            self.error(f"malformed integer suffix {src[j:k]!r}")
        if k < n and (src[k].isalnum() or src[k] == "_"):
            self.error("malformed numeric literal")
        value = int(body, 16 if is_hex else 10)
        has_u = "u" in suffix
        has_l = "l" in suffix
        if is_hex:
            if has_u and has_l:
                cands = [U64]
            elif has_u:
                cands = [U32, U64]
            elif has_l:
                cands = [I64, U64]
            else:
                cands = [I32, U32, I64, U64]
        else:
            if has_u and has_l:
                cands = [U64]
            elif has_u:
                cands = [U32, U64]
            elif has_l:
                cands = [I64]
            else:
                cands = [I32, I64]
        for ty in cands:
            if value <= ty.maxval:
                break
        else:
            self.error(f"integer literal {body} out of range")
        self._advance(k - self.pos)
        return Token("num", src[start:k], line, col, start, k, value=value, ty=ty)

    def _char(self, line: int, col: int) -> Token:
        src, start = self.src, self.pos
        j = self.pos + 1
        if j >= len(src):
            self.error("unterminated character literal")
        if src[j] == "\\":
            esc = src[j + 1] if j + 1 < len(src) else ""
            if esc not in _ESCAPES:
                self.error(f"unknown escape \\{esc}")
            value = _ESCAPES[esc]
            j += 2
        else:
            value = ord(src[j])
            j += 1
        if j >= len(src) or src[j] != "'":
            self.error("unterminated character literal")
        j += 1
        self._advance(j - self.pos)
        return Token("char", src[start:j], line, col, start, j, value=value, ty=I32)

    def _string(self, line: int, col: int) -> Token:
        src, start = self.src, self.pos
        j = self.pos + 1
        while j < len(src) and src[j] != '"':
            if src[j] == "\n":
                self.error("unterminated string literal")
            j += 2 if src[j] == "\\" else 1
        if j >= len(src):
            self.error("unterminated string literal")
        j += 1
        self._advance(j - self.pos)
        return Token("str", src[start:j], line, col, start, j)


# ===== PARSER =====

_TYPE_WORDS = {"int", "unsigned", "signed", "char", "short", "long", "void", "_Bool", "bool"}

_ASSIGN_OPS = {"+=": "+", "-=": "-", "*=": "*", "/=": "/", "%=": "%",
               "<<=": "<<", ">>=": ">>", "&=": "&", "|=": "|", "^=": "^"}

_BINPREC = {
    "||": 1, "&&": 2, "|": 3, "^": 4, "&": 5,
    "==": 6, "!=": 6, "<": 7, "<=": 7, ">": 7, ">=": 7,
    "<<": 8, ">>": 8, "+": 9, "-": 9, "*": 10, "/": 10, "%": 10,
}

_ASSERT_NAMES = {"assert", "__VERIFIER_assert", "__CPROVER_assert"}
_ASSUME_NAMES = {"assume", "__VERIFIER_assume", "__CPROVER_assume"}


class _Parser:
    def __init__(self, toks: list[Token], src: str, filename: str):
        self.toks = toks
        self.src = src
        self.filename = filename
        self.i = 0
        self.p = Program(source_name=filename)

    # --- token plumbing ---

    def tok(self, ahead: int = 0) -> Token:
        return self.toks[min(self.i + ahead, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        t = self.tok()
        return t.kind in ("punct", "ident") and t.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            t = self.tok()
            self.error(f"expected {text!r}, found {t.text!r}" if t.kind != "eof" else f"expected {text!r}, found end of input")
        t = self.tok()
        self.i += 1
        return t

    def error(self, msg: str, tok: Token | None = None):
        t = tok or self.tok()
        raise FrontendError([Diagnostic(self.filename, t.line, t.col, "error", msg)])

    def loc(self, tok: Token | None = None) -> Loc:
        t = tok or self.tok()
        return Loc(t.line, t.col)

    def nid(self) -> int:
        return self.p.fresh_nid()

    def _check_unsupported(self):
        t = self.tok()
        if t.kind == "ident" and t.text in _UNSUPPORTED_KEYWORDS:
            self.error(f"feature-unsupported: {_UNSUPPORTED_KEYWORDS[t.text]}")

    # --- types ---

    def at_type(self) -> bool:
        t = self.tok()
        return t.kind == "ident" and t.text in _TYPE_WORDS

    def parse_type(self, allow_void: bool = False) -> IntType | None:
        """Returns an IntType, or None for void (when allowed)."""
        t0 = self.tok()
        words = []
        while self.at_type():
            words.append(self.tok().text)
            self.i += 1
        if not words:
            self.error("expected type")
        if "void" in words:
            if words != ["void"] or not allow_void:
                self.error("invalid use of void", t0)
            return None
        if "bool" in words or "_Bool" in words:
            if len(words) != 1:
                self.error("invalid type combination", t0)
            return BOOL
        unsigned = "unsigned" in words
        signed = "signed" in words
        if unsigned and signed:
            self.error("both signed and unsigned in type", t0)
        base = [w for w in words if w not in ("unsigned", "signed")]
        nlong = base.count("long")
        nint = base.count("int")
        if base.count("char") == 1 and nlong == 0 and nint == 0 and base.count("short") == 0 and len(base) == 1:
            return U8 if unsigned else I8
        if base.count("short") == 1 and nlong == 0 and len(base) - nint == 1 and nint <= 1:
            return U16 if unsigned else I16
        if nlong in (1, 2) and base.count("short") == 0 and base.count("char") == 0 and len(base) - nint == nlong and nint <= 1:
            return U64 if unsigned else I64
        if base in ([], ["int"]):
            return U32 if unsigned else I32
        self.error("invalid type combination", t0)
        return I32  # unreachable

    # --- top level ---

    def parse_program(self) -> Program:
        while self.tok().kind != "eof":
            self._check_unsupported()
            if self.at("extern"):
                self._skip_prototype()
                continue
            if not self.at_type():
                self.error("expected declaration or function definition")
            start = self.i
            ty = self.parse_type(allow_void=True)
            name_tok = self.tok()
            if name_tok.kind != "ident" or name_tok.text in _KEYWORDS:
                if self.at("*"):
                    self.error("feature-unsupported: pointer types")
                self.error("expected identifier")
            self.i += 1
            if self.at("("):
                self.parse_function(ty, name_tok)
            else:
                if ty is None:
                    self.error("void is not a variable type", name_tok)
                self.i = start
                self.p.globals.extend(self.parse_decls())
        if "main" not in self.p.functions:
            raise FrontendError([Diagnostic(self.filename, 1, 1, "error", "program has no main function")])
        return self.p

    def _skip_prototype(self):
        t0 = self.expect("extern")
        depth = 0
        while self.tok().kind != "eof":
            t = self.tok()
            self.i += 1
            if t.text == "(":
                depth += 1
            elif t.text == ")":
                depth -= 1
            elif t.text == "{" and depth == 0:
                self.error("extern declarations must be prototypes", t0)
            elif t.text == ";" and depth == 0:
                return
        self.error("unterminated extern declaration", t0)

    def parse_function(self, ret: IntType | None, name_tok: Token):
        name = name_tok.text
        if name in self.p.functions:
            self.error(f"redefinition of function {name!r}", name_tok)
        self.expect("(")
        params: list[Param] = []
        if self.accept("void"):
            pass
        elif not self.at(")"):
            while True:
                self._check_unsupported()
                pty = self.parse_type()
                if self.at("*"):
                    self.error("feature-unsupported: pointer types")
                pt = self.tok()
                if pt.kind != "ident" or pt.text in _KEYWORDS:
                    self.error("expected parameter name")
                self.i += 1
                params.append(Param(pt.text, pty))
                if not self.accept(","):
                    break
        self.expect(")")
        if self.at(";"):
            self.error("function prototypes must use extern", name_tok)
        body = self.parse_block()
        self.p.functions[name] = Function(name, ret, params, body, Loc(name_tok.line, name_tok.col))

    # --- statements ---

    def parse_block(self) -> Block:
        ltok = self.expect("{")
        stmts: list[Stmt] = []
        while not self.at("}"):
            if self.tok().kind == "eof":
                self.error("unterminated block", ltok)
            stmts.extend(self.parse_stmt_multi())
        self.expect("}")
        return Block(stmts, nid=self.nid(), loc=self.loc(ltok))

    def parse_stmt_multi(self) -> list[Stmt]:
        """One syntactic statement; declarations may expand to several nodes."""
        self._check_unsupported()
        if self.at_type():
            return self.parse_decls()
        return [self.parse_stmt()]

    def parse_decls(self) -> list[Decl]:
        t0 = self.tok()
        ty = self.parse_type()
        out = []
        while True:
            if self.at("*"):
                self.error("feature-unsupported: pointer types")
            nt = self.tok()
            if nt.kind != "ident" or nt.text in _KEYWORDS:
                self.error("expected identifier in declaration")
            self.i += 1
            if self.at("["):
                self.error("feature-unsupported: array types")
            init = None
            if self.accept("="):
                init = self.parse_expr()
            out.append(Decl(nt.text, ty, init, nid=self.nid(), loc=Loc(nt.line, nt.col)))
            if not self.accept(","):
                break
        self.expect(";")
        return out

    def parse_stmt(self) -> Stmt:
        t = self.tok()
        if self.at("{"):
            return self.parse_block()
        if self.accept(";"):
            return Block([], nid=self.nid(), loc=Loc(t.line, t.col))
        if self.at("if"):
            return self.parse_if()
        if self.at("while"):
            self.i += 1
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            body = self.parse_stmt()
            return While(cond, body, nid=self.nid(), loc=Loc(t.line, t.col))
        if self.at("do"):
            self.i += 1
            body = self.parse_stmt()
            self.expect("while")
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            self.expect(";")
            return DoWhile(body, cond, nid=self.nid(), loc=Loc(t.line, t.col))
        if self.at("for"):
            return self.parse_for()
        if self.accept("break"):
            self.expect(";")
            return Break(nid=self.nid(), loc=Loc(t.line, t.col))
        if self.accept("continue"):
            self.expect(";")
            return Continue(nid=self.nid(), loc=Loc(t.line, t.col))
        if self.accept("return"):
            value = None if self.at(";") else self.parse_expr()
            self.expect(";")
            return Return(value, nid=self.nid(), loc=Loc(t.line, t.col))
        if t.kind == "ident" and t.text in _ASSERT_NAMES:
            self.i += 1
            self.expect("(")
            cond = self.parse_expr()
            if self.accept(","):
                if self.tok().kind != "str":
                    self.error("expected message string in assert")
                self.i += 1
            self.expect(")")
            self.expect(";")
            return Assert(cond, nid=self.nid(), loc=Loc(t.line, t.col))
        if t.kind == "ident" and t.text in _ASSUME_NAMES:
            self.i += 1
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            self.expect(";")
            return Assume(cond, nid=self.nid(), loc=Loc(t.line, t.col))
        if t.kind == "ident" and t.text == "printf":
            return self.parse_printf()
        return self.parse_simple_stmt(require_semi=True)

    def parse_printf(self) -> Noop:
        t = self.expect("printf")
        open_tok = self.expect("(")
        depth = 1
        while depth > 0:
            tt = self.tok()
            if tt.kind == "eof":
                self.error("unterminated printf", t)
            if tt.text == "(":
                depth += 1
            elif tt.text == ")":
                depth -= 1
            if depth > 0:
                self.i += 1
        close_tok = self.tok()
        self.i += 1
        self.expect(";")
        raw = self.src[open_tok.end:close_tok.pos].strip()
        return Noop(raw, nid=self.nid(), loc=Loc(t.line, t.col))

    def parse_if(self) -> If:
        t = self.expect("if")
        self.expect("(")
        cond = self.parse_expr()
        self.expect(")")
        then = self.parse_stmt()
        orelse = None
        if self.accept("else"):
            orelse = self.parse_stmt()
        return If(cond, then, orelse, nid=self.nid(), loc=Loc(t.line, t.col))

    def parse_for(self) -> For:
        t = self.expect("for")
        self.expect("(")
        init: Stmt | None = None
        if not self.at(";"):
            if self.at_type():
                decls = self.parse_decls()
                if len(decls) != 1:
                    self.error("for-init must declare a single variable", t)
                init = decls[0]
            else:
                init = self.parse_simple_stmt(require_semi=True)
        else:
            self.expect(";")
        cond = None if self.at(";") else self.parse_expr()
        self.expect(";")
        update = None if self.at(")") else self.parse_simple_stmt(require_semi=False)
        self.expect(")")
        body = self.parse_stmt()
        return For(init, cond, update, body, nid=self.nid(), loc=Loc(t.line, t.col))

    def parse_simple_stmt(self, require_semi: bool) -> Stmt:
        t = self.tok()
        if t.text in ("++", "--"):
            self.i += 1
            nt = self.tok()
            if nt.kind != "ident" or nt.text in _KEYWORDS:
                self.error("expected identifier after increment")
            self.i += 1
            s: Stmt = OpAssign(nt.text, "+" if t.text == "++" else "-",
                               Literal(1, ty=I32, nid=self.nid(), loc=Loc(t.line, t.col)),
                               nid=self.nid(), loc=Loc(t.line, t.col))
        elif t.kind == "ident" and t.text not in _KEYWORDS and self.tok(1).text in ("=", "++", "--", *_ASSIGN_OPS):
            self.i += 1
            op_tok = self.tok()
            self.i += 1
            if op_tok.text == "=":
                s = Assign(t.text, self.parse_expr(), nid=self.nid(), loc=Loc(t.line, t.col))
            elif op_tok.text in ("++", "--"):
                s = OpAssign(t.text, "+" if op_tok.text == "++" else "-",
                             Literal(1, ty=I32, nid=self.nid(), loc=Loc(op_tok.line, op_tok.col)),
                             nid=self.nid(), loc=Loc(t.line, t.col))
            else:
                s = OpAssign(t.text, _ASSIGN_OPS[op_tok.text], self.parse_expr(),
                             nid=self.nid(), loc=Loc(t.line, t.col))
        else:
            s = ExprStmt(self.parse_expr(), nid=self.nid(), loc=Loc(t.line, t.col))
        if require_semi:
            self.expect(";")
        return s

    # --- expressions ---

    def parse_expr(self, min_prec: int = 1) -> Expr:
        lhs = self.parse_unary()
        while True:
            t = self.tok()
            if t.text == "?":
                self.error("feature-unsupported: conditional operator")
            prec = _BINPREC.get(t.text, 0) if t.kind == "punct" else 0
            if prec < min_prec:
                return lhs
            self.i += 1
            rhs = self.parse_expr(prec + 1)
            lhs = Binary(t.text, lhs, rhs, nid=self.nid(), loc=Loc(t.line, t.col))

    def parse_unary(self) -> Expr:
        t = self.tok()
        if t.text in ("++", "--"):
            self.error("feature-unsupported: increment inside an expression")
        if t.text == "+":
            self.i += 1
            return self.parse_unary()
        if t.text in ("-", "!", "~"):
            self.i += 1
            return Unary(t.text, self.parse_unary(), nid=self.nid(), loc=Loc(t.line, t.col))
        if t.text == "*":
            self.error("feature-unsupported: pointer dereference")
        if t.text == "&":
            self.error("feature-unsupported: address-of")
        return self.parse_primary()

    def parse_primary(self) -> Expr:
        t = self.tok()
        self._check_unsupported()
        if t.kind in ("num", "char"):
            self.i += 1
            return Literal(t.value, ty=t.ty, nid=self.nid(), loc=Loc(t.line, t.col))
        if t.kind == "str":
            self.error("feature-unsupported: string literals outside printf")
        if t.text == "(":
            save = self.i
            self.i += 1
            if self.at_type():
                ty = self.parse_type()
                self.expect(")")
                return Cast(ty, self.parse_unary(), nid=self.nid(), loc=Loc(t.line, t.col))
            self.i = save
            self.expect("(")
            e = self.parse_expr()
            self.expect(")")
            return e
        if t.text == "true":
            self.i += 1
            return Literal(1, ty=I32, nid=self.nid(), loc=Loc(t.line, t.col))
        if t.text == "false":
            self.i += 1
            return Literal(0, ty=I32, nid=self.nid(), loc=Loc(t.line, t.col))
        if t.kind == "ident" and t.text not in _KEYWORDS:
            name = t.text
            self.i += 1
            if self.at("("):
                if name in _ASSERT_NAMES or name in _ASSUME_NAMES:
                    self.error(f"{name} is a statement, not an expression", t)
                if name == "printf":
                    self.error("printf is a statement, not an expression", t)
                bare = name[11:] if name.startswith("__VERIFIER_") else name
                if bare in NONDET_NAMES:
                    self.expect("(")
                    self.expect(")")
                    return Nondet(NONDET_NAMES[bare], nid=self.nid(), loc=Loc(t.line, t.col))
                self.expect("(")
                args = []
                if not self.at(")"):
                    while True:
                        args.append(self.parse_expr())
                        if not self.accept(","):
                            break
                self.expect(")")
                return Call(name, args, nid=self.nid(), loc=Loc(t.line, t.col))
            if self.at("["):
                self.error("feature-unsupported: array subscripts")
            return Var(name, nid=self.nid(), loc=Loc(t.line, t.col))
        self.error(f"expected expression, found {t.text!r}" if t.kind != "eof" else "expected expression, found end of input")
        raise AssertionError


# ===== RESOLUTION AND TYPE CHECKING =====


class _Checker:
    """Resolves names (renaming shadowed declarations to be program-unique),
    assigns expression types and operand conversion types, validates calls,
    detects recursion, and assigns loop ids in source order.

    With renaming=False it re-derives types and loop ids on an already
    resolved program (used after transforms that synthesize nodes).
    """

    def __init__(self, p: Program, renaming: bool = True):
        self.p = p
        self.renaming = renaming
        self.filename = p.source_name
        self.diags: list[Diagnostic] = []
        self.scopes: list[dict[str, str]] = []
        self.depth = 0
        self.fn: Function | None = None
        self.loop_depth = 0
        self.calls_from: dict[str, set[str]] = {}

    def error(self, loc: Loc, msg: str):
        self.diags.append(Diagnostic(self.filename, loc.line, loc.col, "error", msg))

    def fail_now(self):
        if self.diags:
            raise FrontendError(self.diags)

    def run(self):
        self.p.next_loop_id = 0
        self.scopes = [{}]
        for d in self.p.globals:
            self.declare(d, is_global=True)
            if d.init is not None:
                for e in iter_exprs(d.init):
                    if isinstance(e, Call):
                        self.error(e.loc, "function calls are not allowed in global initializers")
                self.visit_expr(d.init)
        self.fail_now()
        for fn in self.p.functions.values():
            self.check_function(fn)
        self.fail_now()
        self.check_main()
        self.check_recursion()
        self.fail_now()

    def declare(self, d: Decl, is_global: bool = False):
        if self.renaming:
            unique = self.p.fresh_name(d.name)
            self.scopes[-1][d.name] = unique
            d.name = unique
            self.p.add_symbol(unique, d.var_type, self.depth, is_global=is_global, is_instr=d.instr)
        else:
            self.scopes[-1][d.name] = d.name
            if d.name not in self.p.symbols:
                self.p.add_symbol(d.name, d.var_type, self.depth, is_global=is_global, is_instr=d.instr)

    def lookup(self, name: str, loc: Loc) -> str | None:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        self.error(loc, f"use of undeclared variable {name!r}")
        return None

    def check_function(self, fn: Function):
        self.fn = fn
        self.calls_from.setdefault(fn.name, set())
        self.depth = 1
        self.scopes.append({})
        for param in fn.params:
            if self.renaming:
                unique = self.p.fresh_name(param.name)
                self.scopes[-1][param.name] = unique
                param.name = unique
                self.p.add_symbol(unique, param.var_type, 1)
            else:
                self.scopes[-1][param.name] = param.name
                if param.name not in self.p.symbols:
                    self.p.add_symbol(param.name, param.var_type, 1)
        self.visit_block(fn.body)
        self.scopes.pop()
        self.depth = 0
        self.fn = None

    def visit_block(self, b: Block):
        self.depth += 1
        self.scopes.append({})
        for s in b.stmts:
            self.visit_stmt(s)
        self.scopes.pop()
        self.depth -= 1

    def visit_stmt(self, s: Stmt):
        if isinstance(s, Block):
            self.visit_block(s)
        elif isinstance(s, Decl):
            if s.init is not None:
                self.visit_expr(s.init)
            self.declare(s)  # initializer sees the outer binding, C-style
        elif isinstance(s, Assign):
            unique = self.lookup(s.name, s.loc)
            if unique:
                s.name = unique
            self.visit_expr(s.value)
        elif isinstance(s, OpAssign):
            unique = self.lookup(s.name, s.loc)
            if unique:
                s.name = unique
                vt = self.p.symbols[unique].var_type
                rt = self.visit_expr(s.value)
                if rt is not None:
                    s.opty = promote(vt) if s.op in ("<<", ">>") else usual(vt, rt)
        elif isinstance(s, ExprStmt):
            self.visit_expr(s.expr, as_value=False)
        elif isinstance(s, If):
            self.visit_expr(s.cond)
            self.visit_stmt(s.then)
            if s.orelse is not None:
                self.visit_stmt(s.orelse)
        elif isinstance(s, While):
            s.loop_id = self.p.fresh_loop_id()
            self.visit_expr(s.cond)
            self.loop_depth += 1
            self.visit_stmt(s.body)
            self.loop_depth -= 1
        elif isinstance(s, DoWhile):
            s.loop_id = self.p.fresh_loop_id()
            self.loop_depth += 1
            self.visit_stmt(s.body)
            self.loop_depth -= 1
            self.visit_expr(s.cond)
        elif isinstance(s, For):
            s.loop_id = self.p.fresh_loop_id()
            self.depth += 1
            self.scopes.append({})  # a for-init declaration scopes to the loop
            if s.init is not None:
                self.visit_stmt(s.init)
            if s.cond is not None:
                self.visit_expr(s.cond)
            if s.update is not None:
                self.visit_stmt(s.update)
            self.loop_depth += 1
            self.visit_stmt(s.body)
            self.loop_depth -= 1
            self.scopes.pop()
            self.depth -= 1
        elif isinstance(s, Break):
            if self.loop_depth == 0:
                self.error(s.loc, "break outside a loop")
        elif isinstance(s, Continue):
            if self.loop_depth == 0:
                self.error(s.loc, "continue outside a loop")
        elif isinstance(s, Return):
            assert self.fn is not None
            if s.value is not None:
                if self.fn.ret is None:
                    self.error(s.loc, f"void function {self.fn.name!r} returns a value")
                self.visit_expr(s.value)
            elif self.fn.ret is not None:
                self.error(s.loc, f"non-void function {self.fn.name!r} returns no value")
        elif isinstance(s, (Assert, Assume)):
            self.visit_expr(s.cond)
        elif isinstance(s, Noop):
            pass
        else:
            raise AssertionError(f"unhandled statement {type(s).__name__}")

    def visit_expr(self, e: Expr, as_value: bool = True) -> IntType | None:
        if isinstance(e, Literal):
            if e.ty is None:
                e.ty = I32
            return e.ty
        if isinstance(e, Var):
            unique = self.lookup(e.name, e.loc)
            if unique is None:
                return None
            e.name = unique
            e.ty = self.p.symbols[unique].var_type
            return e.ty
        if isinstance(e, Nondet):
            e.ty = e.nd_type
            return e.ty
        if isinstance(e, Cast):
            self.visit_expr(e.operand)
            e.ty = e.to
            return e.ty
        if isinstance(e, Unary):
            t = self.visit_expr(e.operand)
            if t is None:
                return None
            e.opty = promote(t)
            e.ty = I32 if e.op == "!" else e.opty
            return e.ty
        if isinstance(e, Binary):
            lt = self.visit_expr(e.lhs)
            rt = self.visit_expr(e.rhs)
            if lt is None or rt is None:
                return None
            if e.op in ("&&", "||"):
                e.opty = None
                e.ty = I32
            elif e.op in ("<<", ">>"):
                e.opty = promote(lt)
                e.ty = e.opty
            elif e.op in ("<", "<=", ">", ">=", "==", "!="):
                e.opty = usual(lt, rt)
                e.ty = I32
            else:
                e.opty = usual(lt, rt)
                e.ty = e.opty
            return e.ty
        if isinstance(e, Call):
            fn = self.p.functions.get(e.name)
            if fn is None:
                self.error(e.loc, f"call to undefined function {e.name!r}")
                for a in e.args:
                    self.visit_expr(a)
                return None
            if self.fn is not None:
                self.calls_from.setdefault(self.fn.name, set()).add(e.name)
            if len(e.args) != len(fn.params):
                self.error(e.loc, f"call to {e.name!r} with {len(e.args)} arguments, expected {len(fn.params)}")
            for a in e.args:
                self.visit_expr(a)
            if fn.ret is None and as_value:
                self.error(e.loc, f"void value of {e.name!r}() used in an expression")
            e.ty = fn.ret if fn.ret is not None else I32
            return e.ty
        raise AssertionError(f"unhandled expression {type(e).__name__}")

    def check_main(self):
        main = self.p.functions.get("main")
        if main is None:
            self.diags.append(Diagnostic(self.filename, 1, 1, "error", "program has no main function"))
            return
        if main.ret != I32 or main.params:
            self.error(main.loc, "main must be declared as int main(void)")

    def check_recursion(self):
        color: dict[str, int] = {}
        stack: list[str] = []

        def dfs(f: str):
            color[f] = 1
            stack.append(f)
            for g in sorted(self.calls_from.get(f, ())):
                if g not in self.p.functions:
                    continue
                if color.get(g, 0) == 1:
                    cycle = stack[stack.index(g):] + [g]
                    loc = self.p.functions[g].loc
                    self.error(loc, "feature-unsupported: recursion (call cycle " + " -> ".join(cycle) + ")")
                elif color.get(g, 0) == 0:
                    dfs(g)
            stack.pop()
            color[f] = 2

        for f in self.p.functions:
            if color.get(f, 0) == 0:
                dfs(f)


# ===== PUBLIC OPERATIONS =====


def parse(source: str, filename: str = "<input>") -> Program:
    """Parse, resolve, and type-check MiniC source into a Program.

    Raises FrontendError carrying file:line:col diagnostics on syntax
    errors, unsupported constructs, unresolved names, or recursion.
    """
    toks = _Lexer(source, filename).tokens()
    p = _Parser(toks, source, filename).parse_program()
    _Checker(p, renaming=True).run()
    return p


def retype(p: Program) -> None:
    """Recompute expression types and loop ids in place after a transform."""
    _Checker(p, renaming=False).run()


def check_supported(p: Program) -> Program:
    """Verify the program stays inside the supported subset and mark every
    non-main function as inlinable. Pure: returns a marked copy."""
    q = clone_program(p)
    checker = _Checker(q, renaming=False)
    checker.calls_from = {}
    for fn in q.functions.values():
        checker.calls_from[fn.name] = {e.name for e in all_exprs(fn.body) if isinstance(e, Call)}
    checker.check_recursion()
    checker.check_main()
    checker.fail_now()
    for fn in q.functions.values():
        fn.inlinable = fn.name != "main"
    return q


# ===== INLINING =====


def contains_call(e: Expr | None) -> bool:
    return e is not None and any(isinstance(x, Call) for x in iter_exprs(e))


def _has_direct(stmt: Stmt, kind) -> bool:
    """True if the subtree has a `kind` statement targeting the enclosing loop
    (the walk does not descend into nested loops)."""
    for c in child_stmts(stmt):
        if isinstance(c, kind):
            return True
        if isinstance(c, Loop):
            continue
        if _has_direct(c, kind):
            return True
    return False


def _may_return(s: Stmt) -> bool:
    return any(isinstance(x, Return) for x in iter_stmts(s))


class _Inliner:
    """Expands every call site bottom-up, producing a single-function program.

    Call results are hoisted to statement position; short-circuit operands
    containing calls are lowered to explicit branching; returns are lowered
    to a per-instantiation done-flag that guards block remainders and loop
    conditions.
    """

    def __init__(self, p: Program):
        self.p = p
        self.callfree: dict[str, Function] = {}
        self.diags: list[Diagnostic] = []

    def error(self, loc: Loc, msg: str):
        raise FrontendError([Diagnostic(self.p.source_name, loc.line, loc.col, "error", msg)])

    def run(self) -> Program:
        order = self._topo_from_main()
        for name in order:
            fn = self.p.functions[name]
            fn.body = Block(self.rewrite_block(fn.body.stmts, 2), nid=self.p.fresh_nid(), loc=fn.body.loc)
            self.callfree[name] = fn
        self.p.functions = {"main": self.p.functions["main"]}
        retype(self.p)
        return self.p

    def _topo_from_main(self) -> list[str]:
        edges = {
            name: sorted({e.name for e in all_exprs(fn.body) if isinstance(e, Call) and e.name in self.p.functions})
            for name, fn in self.p.functions.items()
        }
        order: list[str] = []
        seen: set[str] = set()

        def dfs(f: str):
            seen.add(f)
            for g in edges[f]:
                if g not in seen:
                    dfs(g)
            order.append(f)

        dfs("main")
        return order  # callees before callers; unreachable functions dropped

    # --- typed node helpers (the final retype pass recomputes these anyway) ---

    def _lit(self, v: int) -> Literal:
        return Literal(v, ty=I32, nid=self.p.fresh_nid())

    def _var(self, name: str) -> Var:
        return Var(name, ty=self.p.symbols[name].var_type, nid=self.p.fresh_nid())

    def _isnz(self, e: Expr) -> Expr:
        if isinstance(e, Binary) and e.op in ("==", "!=", "<", "<=", ">", ">=", "&&", "||"):
            return e  # already 0/1 valued
        if isinstance(e, Unary) and e.op == "!":
            return e
        return Binary("!=", e, self._lit(0), nid=self.p.fresh_nid())

    def _not(self, e: Expr) -> Expr:
        return Unary("!", e, nid=self.p.fresh_nid())

    def _decl(self, base: str, ty: IntType, init: Expr | None, depth: int) -> Decl:
        name = self.p.fresh_name(base)
        self.p.add_symbol(name, ty, depth)
        return Decl(name, ty, init, nid=self.p.fresh_nid())

    # --- expression rewriting ---

    def hoist_expr(self, e: Expr, pre: list[Stmt], depth: int) -> Expr:
        if isinstance(e, (Literal, Var, Nondet)):
            return e
        if isinstance(e, Unary):
            e.operand = self.hoist_expr(e.operand, pre, depth)
            return e
        if isinstance(e, Cast):
            e.operand = self.hoist_expr(e.operand, pre, depth)
            return e
        if isinstance(e, Binary):
            if e.op in ("&&", "||") and contains_call(e.rhs):
                lhs = self.hoist_expr(e.lhs, pre, depth)
                t = self._decl("cnd", I32, self._isnz(lhs), depth)
                pre.append(t)
                inner: list[Stmt] = []
                rhs = self.hoist_expr(e.rhs, inner, depth + 1)
                inner.append(Assign(t.name, self._isnz(rhs), nid=self.p.fresh_nid()))
                guard = self._var(t.name) if e.op == "&&" else self._not(self._var(t.name))
                pre.append(If(guard, Block(inner, nid=self.p.fresh_nid()), nid=self.p.fresh_nid()))
                return self._var(t.name)
            e.lhs = self.hoist_expr(e.lhs, pre, depth)
            e.rhs = self.hoist_expr(e.rhs, pre, depth)
            return e
        if isinstance(e, Call):
            args = [self.hoist_expr(a, pre, depth) for a in e.args]
            stmts, result = self.instantiate(e.name, args, depth, e.loc)
            pre.extend(stmts)
            if result is None:
                self.error(e.loc, f"void value of {e.name!r}() used in an expression")
            return self._var(result)
        raise AssertionError(f"unhandled expression {type(e).__name__}")

    # --- statement rewriting ---

    def rewrite_block(self, stmts: list[Stmt], depth: int) -> list[Stmt]:
        out: list[Stmt] = []
        for s in stmts:
            out.extend(self.rewrite_stmt(s, depth))
        return out

    def rewrite_stmt(self, s: Stmt, depth: int) -> list[Stmt]:
        pre: list[Stmt] = []
        if isinstance(s, Block):
            return [Block(self.rewrite_block(s.stmts, depth + 1), nid=s.nid, loc=s.loc)]
        if isinstance(s, Decl):
            if s.init is not None:
                s.init = self.hoist_expr(s.init, pre, depth)
            return pre + [s]
        if isinstance(s, (Assign, OpAssign)):
            s.value = self.hoist_expr(s.value, pre, depth)
            return pre + [s]
        if isinstance(s, (Assert, Assume)):
            s.cond = self.hoist_expr(s.cond, pre, depth)
            return pre + [s]
        if isinstance(s, Return):
            if s.value is not None:
                s.value = self.hoist_expr(s.value, pre, depth)
            return pre + [s]
        if isinstance(s, ExprStmt):
            if isinstance(s.expr, Call):
                args = [self.hoist_expr(a, pre, depth) for a in s.expr.args]
                stmts, _ = self.instantiate(s.expr.name, args, depth, s.expr.loc)
                return pre + stmts
            s.expr = self.hoist_expr(s.expr, pre, depth)
            return pre + [s]
        if isinstance(s, (Break, Continue, Noop)):
            return [s]
        if isinstance(s, If):
            s.cond = self.hoist_expr(s.cond, pre, depth)
            s.then = self._as_one(self.rewrite_stmt(s.then, depth), s.then)
            if s.orelse is not None:
                s.orelse = self._as_one(self.rewrite_stmt(s.orelse, depth), s.orelse)
            return pre + [s]
        if isinstance(s, While):
            body = self._as_one(self.rewrite_stmt(s.body, depth), s.body)
            if not contains_call(s.cond):
                s.body = body
                return [s]
            # re-evaluate the condition (and its calls) at the top of each iteration
            cpre: list[Stmt] = []
            cond = self.hoist_expr(s.cond, cpre, depth + 1)
            tc = self._decl("cnd", I32, self._isnz(cond), depth + 1)
            head = cpre + [tc, If(self._not(self._var(tc.name)), Block([Break(nid=self.p.fresh_nid())], nid=self.p.fresh_nid()), nid=self.p.fresh_nid())]
            return [While(self._lit(1), Block(head + [body], nid=self.p.fresh_nid()), nid=s.nid, loc=s.loc, loop_id=s.loop_id)]
        if isinstance(s, DoWhile):
            if contains_call(s.cond) and _has_direct(s, Continue):
                self.error(s.loc, "feature-unsupported: call in do-while condition combined with continue")
            body = self._as_one(self.rewrite_stmt(s.body, depth), s.body)
            if not contains_call(s.cond):
                s.body = body
                return [s]
            tc = self._decl("cnd", I32, self._lit(0), depth)
            cpre: list[Stmt] = []
            cond = self.hoist_expr(s.cond, cpre, depth + 1)
            tail = cpre + [Assign(tc.name, self._isnz(cond), nid=self.p.fresh_nid())]
            return [tc, DoWhile(Block([body] + tail, nid=self.p.fresh_nid()), self._var(tc.name), nid=s.nid, loc=s.loc, loop_id=s.loop_id)]
        if isinstance(s, For):
            if s.init is not None:
                init_stmts = self.rewrite_stmt(s.init, depth)
                if len(init_stmts) == 1:
                    s.init = init_stmts[0]
                else:
                    pre.extend(init_stmts)
                    s.init = None
            body = self._as_one(self.rewrite_stmt(s.body, depth), s.body)
            tail: list[Stmt] = []
            if s.update is not None and any(contains_call(e) for e in stmt_exprs(s.update)):
                # a moved update must still run before each condition check,
                # which continue would bypass
                if _has_direct(s, Continue):
                    self.error(s.loc, "feature-unsupported: call in for-update combined with continue")
                tail = self.rewrite_stmt(s.update, depth + 1)
                s.update = None
            elif s.update is not None:
                s.update = self._as_one(self.rewrite_stmt(s.update, depth), s.update)
            if s.cond is not None and contains_call(s.cond):
                cpre: list[Stmt] = []
                cond = self.hoist_expr(s.cond, cpre, depth + 1)
                tc = self._decl("cnd", I32, self._isnz(cond), depth + 1)
                head = cpre + [tc, If(self._not(self._var(tc.name)), Block([Break(nid=self.p.fresh_nid())], nid=self.p.fresh_nid()), nid=self.p.fresh_nid())]
                s.cond = None
                body = Block(head + [body] + tail, nid=self.p.fresh_nid())
            elif tail:
                body = Block([body] + tail, nid=self.p.fresh_nid())
            s.body = body
            return pre + [s]
        raise AssertionError(f"unhandled statement {type(s).__name__}")

    def _as_one(self, stmts: list[Stmt], orig: Stmt) -> Stmt:
        if len(stmts) == 1:
            return stmts[0]
        return Block(stmts, nid=self.p.fresh_nid(), loc=orig.loc)

    # --- instantiation ---

    def instantiate(self, fname: str, args: list[Expr], depth: int, loc: Loc) -> tuple[list[Stmt], str | None]:
        fn = self.callfree[fname]
        stmts: list[Stmt] = []
        rename: dict[str, str] = {}
        for param, arg in zip(fn.params, args):
            fresh = self.p.fresh_name(param.name)
            self.p.add_symbol(fresh, param.var_type, depth)
            rename[param.name] = fresh
            stmts.append(Decl(fresh, param.var_type, arg, nid=self.p.fresh_nid(), loc=loc))
        ret_name = None
        if fn.ret is not None:
            ret_name = self.p.fresh_name(f"ret_{fname}")
            self.p.add_symbol(ret_name, fn.ret, depth)
            stmts.append(Decl(ret_name, fn.ret, self._lit(0), nid=self.p.fresh_nid(), loc=loc))
        body = clone(fn.body, self.p)
        self._rename(body, rename, depth)
        for st in iter_stmts(body):
            if isinstance(st, Loop):
                st.loop_id = self.p.fresh_loop_id()
        lowered = self._lower_returns(body, ret_name, depth, loc)
        stmts.append(lowered)
        return stmts, ret_name

    def _rename(self, s: Stmt, rename: dict[str, str], depth: int):
        # declarations always precede uses inside a checked body, so one
        # pre-order pass with a shared map renames the whole instantiation
        for st in iter_stmts(s):
            if isinstance(st, Decl):
                fresh = self.p.fresh_name(st.name)
                self.p.add_symbol(fresh, st.var_type, depth)
                rename[st.name] = fresh
                st.name = fresh
            elif isinstance(st, (Assign, OpAssign)) and st.name in rename:
                st.name = rename[st.name]
            for e in stmt_exprs(st):
                for x in iter_exprs(e):
                    if isinstance(x, Var) and x.name in rename:
                        x.name = rename[x.name]

    def _lower_returns(self, body: Block, ret_name: str | None, depth: int, loc: Loc) -> Stmt:
        if not _may_return(body):
            return body
        # single trailing return needs no flag
        if (
            body.stmts
            and isinstance(body.stmts[-1], Return)
            and sum(1 for st in iter_stmts(body) if isinstance(st, Return)) == 1
        ):
            last = body.stmts.pop()
            assert isinstance(last, Return)
            if last.value is not None and ret_name is not None:
                body.stmts.append(Assign(ret_name, last.value, nid=self.p.fresh_nid(), loc=last.loc))
            return body
        done = self._decl("done", BOOL, self._lit(0), depth)
        lowered = self._lower_block(body.stmts, ret_name, done.name)
        return Block([done] + lowered, nid=self.p.fresh_nid(), loc=loc)

    def _lower_block(self, stmts: list[Stmt], ret_name: str | None, done: str) -> list[Stmt]:
        out: list[Stmt] = []
        for i, s in enumerate(stmts):
            if isinstance(s, Return):
                if s.value is not None and ret_name is not None:
                    out.append(Assign(ret_name, s.value, nid=self.p.fresh_nid(), loc=s.loc))
                out.append(Assign(done, self._lit(1), nid=self.p.fresh_nid(), loc=s.loc))
                return out  # statically dead remainder is dropped
            had_return = _may_return(s)  # before lowering rewrites the Return away
            out.append(self._lower_stmt(s, ret_name, done))
            if had_return:
                rest = self._lower_block(stmts[i + 1:], ret_name, done)
                if rest:
                    out.append(If(self._not(self._var(done)), Block(rest, nid=self.p.fresh_nid()), nid=self.p.fresh_nid()))
                return out
        return out

    def _lower_stmt(self, s: Stmt, ret_name: str | None, done: str) -> Stmt:
        if not _may_return(s):
            return s
        if isinstance(s, Return):
            out: list[Stmt] = []
            if s.value is not None and ret_name is not None:
                out.append(Assign(ret_name, s.value, nid=self.p.fresh_nid(), loc=s.loc))
            out.append(Assign(done, self._lit(1), nid=self.p.fresh_nid(), loc=s.loc))
            return Block(out, nid=self.p.fresh_nid(), loc=s.loc)
        if isinstance(s, Block):
            return Block(self._lower_block(s.stmts, ret_name, done), nid=s.nid, loc=s.loc)
        if isinstance(s, If):
            s.then = self._lower_stmt(s.then, ret_name, done)
            if s.orelse is not None:
                s.orelse = self._lower_stmt(s.orelse, ret_name, done)
            return s
        if isinstance(s, While):
            s.cond = Binary("&&", self._not(self._var(done)), s.cond, nid=self.p.fresh_nid())
            s.body = self._lower_stmt(s.body, ret_name, done)
            return s
        if isinstance(s, DoWhile):
            s.cond = Binary("&&", self._not(self._var(done)), s.cond, nid=self.p.fresh_nid())
            s.body = self._lower_stmt(s.body, ret_name, done)
            return s
        if isinstance(s, For):
            base = s.cond if s.cond is not None else self._lit(1)
            s.cond = Binary("&&", self._not(self._var(done)), base, nid=self.p.fresh_nid())
            # note: the update still runs once after an early return fires in
            # the body; MiniC updates are side-effect-light so this only
            # touches dead locals
            s.body = self._lower_stmt(s.body, ret_name, done)
            return s
        raise AssertionError(f"return inside unhandled statement {type(s).__name__}")


def inline_program(p: Program) -> Program:
    """Expand all calls into main, producing a call-free single-function
    program. Loop ids are renumbered in source order afterwards."""
    q = clone_program(p)
    return _Inliner(q).run()
