use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::error::{ParseError, ParseErrorCode};
use super::lexer::{tokenize, Tok, Token};
use super::model::*;

type PResult<T> = Result<T, ParseError>;

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn new(text: &str) -> PResult<Parser> {
        Ok(Parser {
            toks: tokenize(text)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek_tok(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn loc(&self) -> Loc {
        let t = self.peek();
        Loc::new(t.line, t.col)
    }

    fn advance(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, code: ParseErrorCode, loc: Loc, msg: impl Into<String>) -> ParseError {
        ParseError::new(code, loc.line, loc.col, msg)
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        let t = self.peek();
        ParseError::new(
            ParseErrorCode::Syntax,
            t.line,
            t.col,
            format!("expected {}, found {}", wanted, t.tok.describe()),
        )
    }

    fn expect(&mut self, tok: Tok) -> PResult<Token> {
        if *self.peek_tok() == tok {
            Ok(self.advance())
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek_tok(), Tok::Ident(s) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> PResult<Loc> {
        if self.at_keyword(kw) {
            let loc = self.loc();
            self.advance();
            Ok(loc)
        } else {
            Err(self.unexpected(&format!("`{}`", kw)))
        }
    }

    fn ident(&mut self) -> PResult<(String, Loc)> {
        let loc = self.loc();
        match self.peek_tok().clone() {
            Tok::Ident(s) => {
                self.advance();
                Ok((s, loc))
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    fn string(&mut self) -> PResult<(String, Loc)> {
        let loc = self.loc();
        match self.peek_tok().clone() {
            Tok::Str(s) => {
                self.advance();
                Ok((s, loc))
            }
            _ => Err(self.unexpected("string literal")),
        }
    }

    fn quoted_identifier(&mut self) -> PResult<String> {
        let (s, loc) = self.string()?;
        if !is_identifier(&s) {
            return Err(self.error_at(
                ParseErrorCode::Syntax,
                loc,
                format!("{:?} is not a valid identifier", s),
            ));
        }
        Ok(s)
    }

    fn expect_eof(&mut self) -> PResult<()> {
        if *self.peek_tok() == Tok::Eof {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }

    fn dotted(&mut self) -> PResult<(String, Loc)> {
        let (mut path, loc) = self.ident()?;
        while *self.peek_tok() == Tok::Dot {
            self.advance();
            let (seg, _) = self.ident()?;
            path.push('.');
            path.push_str(&seg);
        }
        Ok((path, loc))
    }

    fn concept(&mut self) -> PResult<ConceptId> {
        let (path, loc) = self.dotted()?;
        ConceptId::parse(&path).ok_or_else(|| {
            self.error_at(
                ParseErrorCode::Syntax,
                loc,
                format!("malformed concept `{}`: segments must match [a-z][a-z0-9_]*", path),
            )
        })
    }

    fn sem_type(&mut self) -> PResult<SemType> {
        let (name, loc) = self.ident()?;
        if name == "list" {
            self.expect(Tok::LAngle)?;
            let inner = self.sem_type()?;
            self.expect(Tok::RAngle)?;
            return Ok(SemType::list_of(inner));
        }
        SemType::from_keyword(&name).ok_or_else(|| {
            self.error_at(
                ParseErrorCode::Syntax,
                loc,
                format!("unknown type `{}`", name),
            )
        })
    }

    fn literal(&mut self) -> PResult<Literal> {
        let t = self.peek().clone();
        let lit = match t.tok {
            Tok::Int(v) => Literal::Int(v),
            Tok::Float(v) => Literal::Float(v),
            Tok::Str(s) => Literal::Str(s),
            Tok::Bytes(b) => Literal::Bytes(b),
            Tok::Ident(ref s) if s == "true" => Literal::Bool(true),
            Tok::Ident(ref s) if s == "false" => Literal::Bool(false),
            Tok::LParen => {
                self.advance();
                self.expect(Tok::RParen)?;
                return Ok(Literal::Unit);
            }
            Tok::LBracket => {
                self.advance();
                let mut items = Vec::new();
                if *self.peek_tok() != Tok::RBracket {
                    loop {
                        items.push(self.literal()?);
                        if *self.peek_tok() == Tok::Comma {
                            self.advance();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(Tok::RBracket)?;
                return Ok(Literal::List(items));
            }
            _ => return Err(self.unexpected("literal")),
        };
        self.advance();
        Ok(lit)
    }

    /// `@name(...)`; returns the annotation name and its location.
    fn annotation_head(&mut self) -> PResult<(String, Loc)> {
        let loc = self.loc();
        self.expect(Tok::At)?;
        let (name, _) = self.ident()?;
        self.expect(Tok::LParen)?;
        Ok((name, loc))
    }

    fn param(&mut self) -> PResult<ParamSig> {
        let mut concept = None;
        let mut unit = None;
        while *self.peek_tok() == Tok::At {
            let (name, loc) = self.annotation_head()?;
            match name.as_str() {
                "concept" if concept.is_none() => concept = Some(self.concept()?),
                "unit" if unit.is_none() => unit = Some(self.ident()?.0),
                "concept" | "unit" => {
                    return Err(self.error_at(
                        ParseErrorCode::Syntax,
                        loc,
                        format!("duplicate @{} annotation", name),
                    ))
                }
                other => {
                    return Err(self.error_at(
                        ParseErrorCode::Syntax,
                        loc,
                        format!("annotation @{} is not allowed on a parameter", other),
                    ))
                }
            }
            self.expect(Tok::RParen)?;
        }
        let (name, loc) = self.ident()?;
        self.expect(Tok::Colon)?;
        let ty = self.sem_type()?;
        let default = if *self.peek_tok() == Tok::Eq {
            self.advance();
            Some(self.literal()?)
        } else {
            None
        };
        Ok(ParamSig {
            name,
            ty,
            concept,
            unit,
            default,
            loc,
        })
    }

    fn operation(&mut self) -> PResult<OperationSig> {
        let mut concept: Option<ConceptId> = None;
        let mut param_concepts: Vec<(String, ConceptId, Loc)> = Vec::new();
        while *self.peek_tok() == Tok::At {
            let (name, loc) = self.annotation_head()?;
            match name.as_str() {
                "concept" if concept.is_none() => concept = Some(self.concept()?),
                "concept" => {
                    return Err(self.error_at(
                        ParseErrorCode::Syntax,
                        loc,
                        "duplicate @concept annotation",
                    ))
                }
                "param" => {
                    let (pname, _) = self.ident()?;
                    self.expect(Tok::Comma)?;
                    let c = self.concept()?;
                    param_concepts.push((pname, c, loc));
                }
                other => {
                    return Err(self.error_at(
                        ParseErrorCode::Syntax,
                        loc,
                        format!("annotation @{} is not allowed on an operation", other),
                    ))
                }
            }
            self.expect(Tok::RParen)?;
        }
        let op_loc = self.keyword("op")?;
        let (name, _) = self.ident()?;
        self.expect(Tok::LParen)?;
        let mut params: Vec<ParamSig> = Vec::new();
        if *self.peek_tok() != Tok::RParen {
            loop {
                let p = self.param()?;
                if params.iter().any(|q| q.name == p.name) {
                    return Err(self.error_at(
                        ParseErrorCode::DupName,
                        p.loc,
                        format!("duplicate parameter `{}` in operation `{}`", p.name, name),
                    ));
                }
                params.push(p);
                if *self.peek_tok() == Tok::Comma {
                    self.advance();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        let returns = if *self.peek_tok() == Tok::Arrow {
            self.advance();
            self.sem_type()?
        } else {
            SemType::Unit
        };
        self.expect(Tok::Semi)?;
        let concept = concept.ok_or_else(|| {
            self.error_at(
                ParseErrorCode::NoConcept,
                op_loc,
                format!("operation `{}` has no @concept annotation", name),
            )
        })?;
        for (pname, c, loc) in param_concepts {
            let p = params.iter_mut().find(|p| p.name == pname).ok_or_else(|| {
                ParseError::new(
                    ParseErrorCode::Syntax,
                    loc.line,
                    loc.col,
                    format!("@param names unknown parameter `{}`", pname),
                )
            })?;
            if p.concept.is_some() {
                return Err(self.error_at(
                    ParseErrorCode::Syntax,
                    loc,
                    format!("parameter `{}` already has a concept", pname),
                ));
            }
            p.concept = Some(c);
        }
        Ok(OperationSig {
            name,
            params,
            returns,
            concept,
            loc: op_loc,
        })
    }

    fn interface(&mut self, direction: Direction, loc: Loc) -> PResult<InterfaceSpec> {
        self.keyword("interface")?;
        let (name, _) = self.ident()?;
        self.expect(Tok::LBrace)?;
        let mut operations: Vec<OperationSig> = Vec::new();
        while *self.peek_tok() != Tok::RBrace {
            let op = self.operation()?;
            if operations.iter().any(|o| o.name == op.name) {
                return Err(self.error_at(
                    ParseErrorCode::DupName,
                    op.loc,
                    format!("duplicate operation `{}` in interface `{}`", op.name, name),
                ));
            }
            operations.push(op);
        }
        self.expect(Tok::RBrace)?;
        Ok(InterfaceSpec {
            name,
            direction,
            operations,
            loc,
        })
    }

    fn component(&mut self) -> PResult<ComponentSpec> {
        let loc = self.keyword("component")?;
        let name = self.quoted_identifier()?;
        self.keyword("version")?;
        let (vtext, vloc) = self.string()?;
        let version = Version::parse(&vtext).ok_or_else(|| {
            self.error_at(
                ParseErrorCode::BadVersion,
                vloc,
                format!("version {:?} is not MAJOR.MINOR.PATCH", vtext),
            )
        })?;
        self.expect(Tok::LBrace)?;
        let mut spec = ComponentSpec::new(&name, version);
        spec.loc = loc;
        while *self.peek_tok() != Tok::RBrace {
            let kloc = self.loc();
            if self.at_keyword("meta") {
                self.advance();
                let (key, _) = self.dotted()?;
                self.expect(Tok::Eq)?;
                let (value, _) = self.string()?;
                self.expect(Tok::Semi)?;
                spec.meta.push(MetaEntry { key, value });
            } else if self.at_keyword("provides") || self.at_keyword("requires") {
                let direction = if self.at_keyword("provides") {
                    Direction::Provided
                } else {
                    Direction::Required
                };
                self.advance();
                let iface = self.interface(direction, kloc)?;
                let list = match direction {
                    Direction::Provided => &mut spec.provided,
                    Direction::Required => &mut spec.required,
                };
                if list.iter().any(|i| i.name == iface.name) {
                    return Err(self.error_at(
                        ParseErrorCode::DupName,
                        kloc,
                        format!("duplicate {} interface `{}`", direction, iface.name),
                    ));
                }
                list.push(iface);
            } else {
                return Err(self.unexpected("`meta`, `provides`, `requires` or `}`"));
            }
        }
        self.expect(Tok::RBrace)?;
        self.expect_eof()?;
        spec.normalize();
        Ok(spec)
    }

    fn endpoint(&mut self, side: &str) -> PResult<Endpoint> {
        let (component, _) = self.ident()?;
        self.expect(Tok::Dot)?;
        self.keyword(side)?;
        self.expect(Tok::Dot)?;
        let (interface, _) = self.ident()?;
        Ok(Endpoint {
            component,
            interface,
        })
    }

    fn project(&mut self) -> PResult<ProjectSpec> {
        let loc = self.keyword("project")?;
        let name = self.quoted_identifier()?;
        self.expect(Tok::LBrace)?;
        let mut spec = ProjectSpec::new(&name);
        spec.loc = loc;
        let mut seen_demands = BTreeSet::new();
        while *self.peek_tok() != Tok::RBrace {
            let kloc = self.loc();
            if self.at_keyword("uses") {
                self.advance();
                let component = self.quoted_identifier()?;
                let constraint = if self.at_keyword("version") {
                    self.advance();
                    let (text, cloc) = self.string()?;
                    VersionConstraint::parse(&text).ok_or_else(|| {
                        self.error_at(
                            ParseErrorCode::BadConstraint,
                            cloc,
                            format!(
                                "version constraint {:?} must be `*`, `=x.y.z` or `>=x.y.z`",
                                text
                            ),
                        )
                    })?
                } else {
                    VersionConstraint::Any
                };
                self.expect(Tok::Semi)?;
                if spec.use_of(&component).is_some() {
                    return Err(self.error_at(
                        ParseErrorCode::DupUse,
                        kloc,
                        format!("component `{}` is already used", component),
                    ));
                }
                spec.uses.push(UseDecl {
                    component,
                    constraint,
                    loc: kloc,
                });
            } else if self.at_keyword("connect") {
                self.advance();
                let consumer = self.endpoint("requires")?;
                self.expect(Tok::Arrow)?;
                let provider = self.endpoint("provides")?;
                self.expect(Tok::Semi)?;
                spec.connections.push(Connection {
                    consumer,
                    provider,
                    loc: kloc,
                });
            } else if self.at_keyword("demand") {
                self.advance();
                let c = self.concept()?;
                self.expect(Tok::Semi)?;
                if seen_demands.insert(c.clone()) {
                    spec.demands.push(c);
                }
            } else {
                return Err(self.unexpected("`uses`, `connect`, `demand` or `}`"));
            }
        }
        self.expect(Tok::RBrace)?;
        self.expect_eof()?;
        Ok(spec)
    }
}

/// Parses a component specification (`.cdl`).
pub fn parse_component(text: &str) -> Result<ComponentSpec, ParseError> {
    Parser::new(text)?.component()
}

/// Parses a project specification (`.pdl`). Component references are not
/// resolved here.
pub fn parse_project(text: &str) -> Result<ProjectSpec, ParseError> {
    Parser::new(text)?.project()
}

/// Parses either document kind, dispatching on the leading keyword.
pub fn parse_document(text: &str) -> Result<SpecDocument, ParseError> {
    let mut p = Parser::new(text)?;
    if p.at_keyword("project") {
        p.project().map(SpecDocument::Project)
    } else {
        p.component().map(SpecDocument::Component)
    }
}

/// Parses raw bytes, rejecting anything that is not UTF-8 with `E_SYNTAX`
/// at the first offending byte.
pub fn decode_utf8(bytes: &[u8]) -> Result<&str, ParseError> {
    core::str::from_utf8(bytes).map_err(|e| {
        let valid = &bytes[..e.valid_up_to()];
        // the prefix is valid by construction
        let prefix = core::str::from_utf8(valid).unwrap_or("");
        let line = prefix.matches('\n').count() as u32 + 1;
        let col = prefix.rsplit('\n').next().map_or(0, |l| l.chars().count()) as u32 + 1;
        ParseError::new(
            ParseErrorCode::Syntax,
            line,
            col,
            "input is not valid UTF-8",
        )
    })
}

/// Parses a single type expression such as `list<i32>`.
pub fn parse_type(text: &str) -> Result<SemType, ParseError> {
    let mut p = Parser::new(text)?;
    let ty = p.sem_type()?;
    p.expect_eof()?;
    Ok(ty)
}

/// Parses a single literal such as `[1, 2]` or `"x"`.
pub fn parse_literal(text: &str) -> Result<Literal, ParseError> {
    let mut p = Parser::new(text)?;
    let lit = p.literal()?;
    p.expect_eof()?;
    Ok(lit)
}

/// Parses one annotated operation declaration, e.g.
/// `@concept(data.sort) op sort(items: list<i32>) -> list<i32>;`.
pub fn parse_operation(text: &str) -> Result<OperationSig, ParseError> {
    let mut p = Parser::new(text)?;
    let op = p.operation()?;
    p.expect_eof()?;
    Ok(op)
}
