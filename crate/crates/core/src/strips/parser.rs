use std::collections::{HashMap, HashSet};

use super::syntax::*;
use super::StripsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone)]
enum Sexp {
    Atom(String, Pos),
    List(Vec<Sexp>, Pos),
}

impl Sexp {
    fn pos(&self) -> Pos {
        match self {
            Sexp::Atom(_, p) | Sexp::List(_, p) => *p,
        }
    }
}

fn syntax(pos: Pos, expected: impl Into<String>) -> StripsError {
    StripsError::Syntax {
        line: pos.line,
        col: pos.col,
        expected: expected.into(),
    }
}

fn read_sexps(text: &str) -> Result<Vec<Sexp>, StripsError> {
    let mut stack: Vec<(Vec<Sexp>, Pos)> = Vec::new();
    let mut top = Vec::new();
    let mut line = 1;
    let mut col = 0;
    let mut chars = text.chars().peekable();
    let mut word = String::new();
    let mut word_pos = Pos { line, col };

    fn flush(word: &mut String, pos: Pos, stack: &mut [(Vec<Sexp>, Pos)], top: &mut Vec<Sexp>) {
        if !word.is_empty() {
            let atom = Sexp::Atom(std::mem::take(word), pos);
            match stack.last_mut() {
                Some((items, _)) => items.push(atom),
                None => top.push(atom),
            }
        }
    }

    while let Some(c) = chars.next() {
        col += 1;
        let here = Pos { line, col };
        match c {
            ';' => {
                flush(&mut word, word_pos, &mut stack, &mut top);
                for c in chars.by_ref() {
                    if c == '\n' {
                        line += 1;
                        col = 0;
                        break;
                    }
                }
            }
            '(' => {
                flush(&mut word, word_pos, &mut stack, &mut top);
                stack.push((Vec::new(), here));
            }
            ')' => {
                flush(&mut word, word_pos, &mut stack, &mut top);
                let (items, pos) = stack.pop().ok_or_else(|| syntax(here, "end of input"))?;
                let list = Sexp::List(items, pos);
                match stack.last_mut() {
                    Some((items, _)) => items.push(list),
                    None => top.push(list),
                }
            }
            c if c.is_whitespace() => {
                flush(&mut word, word_pos, &mut stack, &mut top);
                if c == '\n' {
                    line += 1;
                    col = 0;
                }
            }
            c => {
                if word.is_empty() {
                    word_pos = here;
                }
                word.push(c);
            }
        }
    }
    flush(&mut word, word_pos, &mut stack, &mut top);
    if stack.last().is_some() {
        return Err(syntax(Pos { line, col: col + 1 }, "')'"));
    }
    Ok(top)
}

/// Cursor over the items of one list.
struct Items<'a> {
    items: &'a [Sexp],
    idx: usize,
    /// Position used when the list runs out: the list's own opening paren.
    end: Pos,
}

impl<'a> Items<'a> {
    fn new(items: &'a [Sexp], end: Pos) -> Self {
        Items { items, idx: 0, end }
    }

    fn peek(&self) -> Option<&'a Sexp> {
        self.items.get(self.idx)
    }

    fn next(&mut self) -> Option<&'a Sexp> {
        let it = self.items.get(self.idx);
        self.idx += 1;
        it
    }

    fn here(&self) -> Pos {
        self.peek().map(Sexp::pos).unwrap_or(self.end)
    }

    fn word(&mut self, expected: &str) -> Result<(&'a str, Pos), StripsError> {
        match self.next() {
            Some(Sexp::Atom(w, p)) => Ok((w.as_str(), *p)),
            Some(other) => Err(syntax(other.pos(), expected)),
            None => Err(syntax(self.end, expected)),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), StripsError> {
        let pos = self.here();
        let (w, _) = self.word(kw)?;
        if w.eq_ignore_ascii_case(kw) {
            Ok(())
        } else {
            Err(syntax(pos, kw))
        }
    }

    fn list(&mut self, expected: &str) -> Result<(Items<'a>, Pos), StripsError> {
        match self.next() {
            Some(Sexp::List(items, p)) => Ok((Items::new(items, *p), *p)),
            Some(other) => Err(syntax(other.pos(), expected)),
            None => Err(syntax(self.end, expected)),
        }
    }

    fn finish(&self, expected: &str) -> Result<(), StripsError> {
        match self.peek() {
            None => Ok(()),
            Some(s) => Err(syntax(s.pos(), expected)),
        }
    }

    fn is_empty(&self) -> bool {
        self.idx >= self.items.len()
    }
}

fn single_form(text: &str) -> Result<(Vec<Sexp>, Pos), StripsError> {
    let mut forms = read_sexps(text)?;
    match forms.len() {
        0 => Err(syntax(Pos { line: 1, col: 1 }, "'(define'")),
        1 => match forms.pop() {
            Some(Sexp::List(items, pos)) => Ok((items, pos)),
            Some(Sexp::Atom(_, pos)) => Err(syntax(pos, "'(define'")),
            None => unreachable!(),
        },
        _ => Err(syntax(forms[1].pos(), "end of input")),
    }
}

fn is_symbol(w: &str) -> bool {
    !w.is_empty()
        && !w.starts_with('?')
        && !w.starts_with(':')
        && w.chars().all(|c| c.is_alphanumeric() || c == '-' || c == '_')
}

fn symbol(items: &mut Items<'_>, what: &str) -> Result<String, StripsError> {
    let pos = items.here();
    let (w, _) = items.word(what)?;
    if is_symbol(w) {
        Ok(w.to_string())
    } else {
        Err(syntax(pos, what))
    }
}

/// Parses `a b - t c - u` (or `?x ?y - t`) into typed names. Untyped trailing
/// names get the root type.
fn typed_list(items: &mut Items<'_>, vars: bool) -> Result<Vec<(TypedName, Pos)>, StripsError> {
    let mut out = Vec::new();
    let mut pending: Vec<(String, Pos)> = Vec::new();
    let what = if vars { "variable '?name'" } else { "name" };
    while !items.is_empty() {
        let pos = items.here();
        let (w, _) = items.word(what)?;
        if w == "-" {
            if pending.is_empty() {
                return Err(syntax(pos, what));
            }
            let ty = symbol(items, "type name")?;
            for (name, p) in pending.drain(..) {
                out.push((TypedName { name, ty: ty.clone() }, p));
            }
            continue;
        }
        let name = if vars {
            match w.strip_prefix('?') {
                Some(v) if is_symbol(v) => v.to_string(),
                _ => return Err(syntax(pos, what)),
            }
        } else if is_symbol(w) {
            w.to_string()
        } else {
            return Err(syntax(pos, what));
        };
        pending.push((name, pos));
    }
    for (name, p) in pending {
        out.push((
            TypedName {
                name,
                ty: OBJECT_TYPE.to_string(),
            },
            p,
        ));
    }
    Ok(out)
}

struct DomainCtx {
    types: HashSet<String>,
    predicates: HashMap<String, usize>,
}

fn check_type(ctx: &DomainCtx, ty: &str, pos: Pos) -> Result<(), StripsError> {
    if ty == OBJECT_TYPE || ctx.types.contains(ty) {
        Ok(())
    } else {
        Err(StripsError::UnknownType {
            name: ty.to_string(),
            line: pos.line,
            col: pos.col,
        })
    }
}

fn check_arity(predicates: &HashMap<String, usize>, name: &str, found: usize, pos: Pos) -> Result<(), StripsError> {
    match predicates.get(name) {
        None => Err(StripsError::UnknownPredicate {
            name: name.to_string(),
            line: pos.line,
            col: pos.col,
        }),
        Some(&expected) if expected != found => Err(StripsError::ArityMismatch {
            predicate: name.to_string(),
            expected,
            found,
            line: pos.line,
            col: pos.col,
        }),
        _ => Ok(()),
    }
}

fn schema_atom(
    sexp: &Sexp,
    ctx: &DomainCtx,
    params: &HashSet<String>,
    constants: &HashSet<String>,
) -> Result<Atom, StripsError> {
    let (items, pos) = match sexp {
        Sexp::List(items, p) => (items, *p),
        Sexp::Atom(_, p) => return Err(syntax(*p, "atom '(predicate ...)'")),
    };
    let mut it = Items::new(items, pos);
    let predicate = symbol(&mut it, "predicate name")?;
    let mut args = Vec::new();
    while !it.is_empty() {
        let apos = it.here();
        let (w, _) = it.word("argument")?;
        if let Some(v) = w.strip_prefix('?') {
            if !params.contains(v) {
                return Err(syntax(apos, "declared parameter"));
            }
            args.push(Term::Var(v.to_string()));
        } else if constants.contains(w) {
            args.push(Term::Const(w.to_string()));
        } else {
            return Err(syntax(apos, "parameter or declared constant"));
        }
    }
    check_arity(&ctx.predicates, &predicate, args.len(), pos)?;
    Ok(Atom { predicate, args })
}

fn is_form(sexp: &Sexp, head: &str) -> bool {
    matches!(sexp, Sexp::List(items, _)
        if matches!(items.first(), Some(Sexp::Atom(w, _)) if w.eq_ignore_ascii_case(head)))
}

/// Flattens `(and l1 l2 ...)` or a single literal into literal forms.
fn conjuncts(sexp: &Sexp) -> Result<Vec<&Sexp>, StripsError> {
    match sexp {
        Sexp::List(items, _) if is_form(sexp, "and") => Ok(items[1..].iter().collect()),
        Sexp::List(items, _) if items.is_empty() => Ok(Vec::new()),
        Sexp::List(..) => Ok(vec![sexp]),
        Sexp::Atom(_, p) => Err(syntax(*p, "'(and ...)' or an atom")),
    }
}

fn parse_action(mut it: Items<'_>, ctx: &DomainCtx, constants: &HashSet<String>) -> Result<ActionSchema, StripsError> {
    it.keyword(":action")?;
    let name = symbol(&mut it, "action name")?;
    let mut params = Vec::new();
    let mut precondition = Vec::new();
    let mut add = Vec::new();
    let mut delete = Vec::new();
    let mut param_names = HashSet::new();
    let mut seen_params = false;
    while !it.is_empty() {
        let pos = it.here();
        let (kw, _) = it.word("':parameters', ':precondition' or ':effect'")?;
        match kw.to_ascii_lowercase().as_str() {
            ":parameters" if !seen_params => {
                seen_params = true;
                let (mut plist, _) = it.list("parameter list")?;
                for (tn, p) in typed_list(&mut plist, true)? {
                    check_type(ctx, &tn.ty, p)?;
                    if !param_names.insert(tn.name.clone()) {
                        return Err(syntax(p, "distinct parameter name"));
                    }
                    params.push(tn);
                }
            }
            ":precondition" => {
                let body = it.next().ok_or_else(|| syntax(it.end, "precondition"))?;
                for lit in conjuncts(body)? {
                    if is_form(lit, "not") {
                        return Err(syntax(lit.pos(), "positive precondition"));
                    }
                    precondition.push(schema_atom(lit, ctx, &param_names, constants)?);
                }
            }
            ":effect" => {
                let body = it.next().ok_or_else(|| syntax(it.end, "effect"))?;
                for lit in conjuncts(body)? {
                    if is_form(lit, "not") {
                        let Sexp::List(inner, p) = lit else { unreachable!() };
                        let mut nit = Items::new(inner, *p);
                        nit.next();
                        let target = nit.next().ok_or_else(|| syntax(*p, "negated atom"))?;
                        nit.finish("')'")?;
                        delete.push(schema_atom(target, ctx, &param_names, constants)?);
                    } else {
                        add.push(schema_atom(lit, ctx, &param_names, constants)?);
                    }
                }
            }
            _ => return Err(syntax(pos, "':parameters', ':precondition' or ':effect'")),
        }
    }
    Ok(ActionSchema {
        name,
        params,
        precondition,
        add,
        delete,
    })
}

fn section_name(sexp: &Sexp) -> Result<(&[Sexp], Pos, String), StripsError> {
    match sexp {
        Sexp::List(items, pos) => match items.first() {
            Some(Sexp::Atom(w, _)) if w.starts_with(':') => Ok((items, *pos, w.to_ascii_lowercase())),
            _ => Err(syntax(*pos, "section keyword")),
        },
        Sexp::Atom(_, p) => Err(syntax(*p, "'(' section")),
    }
}

/// Parses model-language domain source into a schema.
pub fn parse_domain(text: &str) -> Result<DomainSchema, StripsError> {
    let (items, pos) = single_form(text)?;
    let mut top = Items::new(&items, pos);
    top.keyword("define")?;
    let (mut head, _) = top.list("'(domain NAME)'")?;
    head.keyword("domain")?;
    let name = symbol(&mut head, "domain name")?;
    head.finish("')'")?;

    let mut ctx = DomainCtx {
        types: HashSet::new(),
        predicates: HashMap::new(),
    };
    let mut types = Vec::new();
    let mut constants = Vec::new();
    let mut constant_names = HashSet::new();
    let mut predicates = Vec::new();
    let mut actions = Vec::new();
    let mut pending_actions = Vec::new();

    while let Some(sec) = top.next() {
        let (sec_items, sec_pos, kw) = section_name(sec)?;
        let mut it = Items::new(sec_items, sec_pos);
        match kw.as_str() {
            ":requirements" => {
                it.next();
                while !it.is_empty() {
                    let rpos = it.here();
                    let (req, _) = it.word("requirement")?;
                    if !matches!(req.to_ascii_lowercase().as_str(), ":strips" | ":typing") {
                        return Err(syntax(rpos, "':strips' or ':typing'"));
                    }
                }
            }
            ":types" => {
                it.next();
                let decls = typed_list(&mut it, false)?;
                for (tn, _) in &decls {
                    ctx.types.insert(tn.name.clone());
                }
                for (tn, p) in decls {
                    check_type(&ctx, &tn.ty, p)?;
                    types.push(TypeDecl {
                        name: tn.name,
                        parent: tn.ty,
                    });
                }
            }
            ":constants" => {
                it.next();
                for (tn, p) in typed_list(&mut it, false)? {
                    check_type(&ctx, &tn.ty, p)?;
                    constant_names.insert(tn.name.clone());
                    constants.push(tn);
                }
            }
            ":predicates" => {
                it.next();
                while !it.is_empty() {
                    let (mut pit, _) = it.list("predicate declaration")?;
                    let pname = symbol(&mut pit, "predicate name")?;
                    let mut params = Vec::new();
                    for (tn, p) in typed_list(&mut pit, true)? {
                        check_type(&ctx, &tn.ty, p)?;
                        params.push(tn);
                    }
                    ctx.predicates.insert(pname.clone(), params.len());
                    predicates.push(PredicateSchema { name: pname, params });
                }
            }
            ":action" => pending_actions.push(it),
            _ => return Err(syntax(sec_pos, "domain section")),
        }
    }
    // actions may precede the predicate block textually
    for it in pending_actions {
        actions.push(parse_action(it, &ctx, &constant_names)?);
    }
    Ok(DomainSchema {
        name,
        types,
        constants,
        predicates,
        actions,
    })
}

fn ground_atom(
    sexp: &Sexp,
    schema: &DomainSchema,
    objects: &HashMap<String, String>,
) -> Result<GroundAtom, StripsError> {
    let (items, pos) = match sexp {
        Sexp::List(items, p) => (items, *p),
        Sexp::Atom(_, p) => return Err(syntax(*p, "ground atom")),
    };
    let mut it = Items::new(items, pos);
    let predicate = symbol(&mut it, "predicate name")?;
    let mut args = Vec::new();
    while !it.is_empty() {
        let apos = it.here();
        let (w, _) = it.word("object name")?;
        if !objects.contains_key(w) {
            return Err(StripsError::UndeclaredConstant {
                name: w.to_string(),
                line: apos.line,
                col: apos.col,
            });
        }
        args.push(w.to_string());
    }
    let arity: HashMap<String, usize> = schema
        .predicates
        .iter()
        .map(|p| (p.name.clone(), p.params.len()))
        .collect();
    check_arity(&arity, &predicate, args.len(), pos)?;
    let decl = schema.predicate(&predicate).expect("arity checked");
    for (arg, param) in args.iter().zip(&decl.params) {
        if !schema.is_subtype(&objects[arg], &param.ty) {
            return Err(StripsError::TypeMismatch {
                object: arg.clone(),
                expected: param.ty.clone(),
                line: pos.line,
                col: pos.col,
            });
        }
    }
    Ok(GroundAtom { predicate, args })
}

fn parse_prior(w: &str, pos: Pos) -> Result<f64, StripsError> {
    match w.parse::<f64>() {
        Ok(p) if p.is_finite() && p >= 0.0 => Ok(p),
        _ => Err(syntax(pos, "non-negative prior")),
    }
}

/// Parses a problem instance against an already parsed domain.
pub fn parse_problem(text: &str, schema: &DomainSchema) -> Result<Problem, StripsError> {
    let (items, pos) = single_form(text)?;
    let mut top = Items::new(&items, pos);
    top.keyword("define")?;
    let (mut head, _) = top.list("'(problem NAME)'")?;
    head.keyword("problem")?;
    let name = symbol(&mut head, "problem name")?;
    head.finish("')'")?;

    let mut domain = None;
    let mut objects = Vec::new();
    let mut object_types: HashMap<String, String> = schema
        .constants
        .iter()
        .map(|c| (c.name.clone(), c.ty.clone()))
        .collect();
    let mut init = Vec::new();
    let mut hypotheses = Vec::new();
    let mut true_goal = None;

    while let Some(sec) = top.next() {
        let (sec_items, sec_pos, kw) = section_name(sec)?;
        let mut it = Items::new(sec_items, sec_pos);
        it.next();
        match kw.as_str() {
            ":domain" => {
                let dpos = it.here();
                let d = symbol(&mut it, "domain name")?;
                if d != schema.name {
                    return Err(syntax(dpos, format!("domain '{}'", schema.name)));
                }
                domain = Some(d);
            }
            ":objects" => {
                for (tn, p) in typed_list(&mut it, false)? {
                    if !schema.has_type(&tn.ty) {
                        return Err(StripsError::UnknownType {
                            name: tn.ty,
                            line: p.line,
                            col: p.col,
                        });
                    }
                    object_types.insert(tn.name.clone(), tn.ty.clone());
                    objects.push(tn);
                }
            }
            ":init" => {
                while let Some(s) = it.next() {
                    init.push(ground_atom(s, schema, &object_types)?);
                }
            }
            ":goal" => {
                let body = it.next().ok_or_else(|| syntax(sec_pos, "goal"))?;
                let facts = conjuncts(body)?
                    .into_iter()
                    .map(|s| ground_atom(s, schema, &object_types))
                    .collect::<Result<_, _>>()?;
                hypotheses.push(Hypothesis { prior: 1.0, facts });
            }
            ":hypotheses" => {
                while !it.is_empty() {
                    let (mut hit, _) = it.list("'(PRIOR (and ...))'")?;
                    let ppos = hit.here();
                    let (w, _) = hit.word("prior")?;
                    let prior = parse_prior(w, ppos)?;
                    let body = hit.next().ok_or_else(|| syntax(hit.end, "goal conjunction"))?;
                    hit.finish("')'")?;
                    let facts = conjuncts(body)?
                        .into_iter()
                        .map(|s| ground_atom(s, schema, &object_types))
                        .collect::<Result<_, _>>()?;
                    hypotheses.push(Hypothesis { prior, facts });
                }
            }
            ":true-goal" => {
                let tpos = it.here();
                let (w, _) = it.word("hypothesis index")?;
                true_goal = Some(w.parse::<usize>().map_err(|_| syntax(tpos, "hypothesis index"))?);
                it.finish("')'")?;
            }
            _ => return Err(syntax(sec_pos, "problem section")),
        }
    }
    let domain = domain.ok_or_else(|| syntax(pos, "'(:domain NAME)' section"))?;
    Ok(Problem {
        name,
        domain,
        objects,
        init,
        hypotheses,
        true_goal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const BLOCKS: &str = r#"
    ; classic four-operator blocksworld
    (define (domain blocks)
      (:requirements :strips :typing)
      (:types block)
      (:predicates (on ?x - block ?y - block) (ontable ?x - block)
                   (clear ?x - block) (handempty) (holding ?x - block))
      (:action pick-up :parameters (?x - block)
        :precondition (and (clear ?x) (ontable ?x) (handempty))
        :effect (and (not (ontable ?x)) (not (clear ?x)) (not (handempty)) (holding ?x)))
      (:action put-down :parameters (?x - block)
        :precondition (holding ?x)
        :effect (and (not (holding ?x)) (clear ?x) (handempty) (ontable ?x)))
      (:action stack :parameters (?x - block ?y - block)
        :precondition (and (holding ?x) (clear ?y))
        :effect (and (not (holding ?x)) (not (clear ?y)) (clear ?x) (handempty) (on ?x ?y)))
      (:action unstack :parameters (?x - block ?y - block)
        :precondition (and (on ?x ?y) (clear ?x) (handempty))
        :effect (and (holding ?x) (clear ?y) (not (clear ?x)) (not (handempty)) (not (on ?x ?y)))))
    "#;

    #[test]
    fn blocks_domain_has_four_actions() {
        let d = parse_domain(BLOCKS).unwrap();
        assert_eq!(d.actions.len(), 4);
        assert_eq!(d.predicates.len(), 5);
        let stack = d.action("stack").unwrap();
        assert_eq!(stack.params.len(), 2);
        assert_eq!(stack.add.len(), 3);
        assert_eq!(stack.delete.len(), 2);
    }

    #[test]
    fn undeclared_predicate_is_rejected() {
        let src = BLOCKS.replace("(on ?x ?y)))))", "(above ?x ?y)))))");
        let err = parse_domain(&src).unwrap_err();
        assert!(
            matches!(err, StripsError::UnknownPredicate { ref name, .. } if name == "above"),
            "{err:?}"
        );
    }

    #[test]
    fn wrong_arity_is_rejected() {
        let src = BLOCKS.replace(":precondition (holding ?x)", ":precondition (holding ?x ?x)");
        let err = parse_domain(&src).unwrap_err();
        assert!(
            matches!(
                err,
                StripsError::ArityMismatch {
                    expected: 1,
                    found: 2,
                    ..
                }
            ),
            "{err:?}"
        );
    }

    #[test]
    fn unknown_type_reports_position() {
        let src = "(define (domain d)\n  (:predicates (p ?x - thing)))";
        match parse_domain(src).unwrap_err() {
            StripsError::UnknownType { name, line, col } => {
                assert_eq!(name, "thing");
                assert_eq!(line, 2);
                assert!(col > 1);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn unbalanced_parens_is_syntax_error() {
        let err = parse_domain("(define (domain d)\n (:predicates (p)").unwrap_err();
        assert!(matches!(err, StripsError::Syntax { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn negative_precondition_rejected() {
        let src = BLOCKS.replace(":precondition (holding ?x)", ":precondition (not (holding ?x))");
        assert!(matches!(parse_domain(&src), Err(StripsError::Syntax { .. })));
    }

    #[test]
    fn pretty_print_reparses_identically() {
        let d = parse_domain(BLOCKS).unwrap();
        let again = parse_domain(&d.to_string()).unwrap();
        assert_eq!(d, again);
    }

    #[test]
    fn problem_with_hypotheses() {
        let d = parse_domain(BLOCKS).unwrap();
        let p = parse_problem(
            "(define (problem t) (:domain blocks) (:objects a b - block)
               (:init (clear a) (clear b) (ontable a) (ontable b) (handempty))
               (:hypotheses (0.8 (and (on a b))) (0.2 (on b a)))
               (:true-goal 1))",
            &d,
        )
        .unwrap();
        assert_eq!(p.hypotheses.len(), 2);
        assert_eq!(p.true_goal, Some(1));
        let again = parse_problem(&p.to_string(), &d).unwrap();
        assert_eq!(p, again);
    }

    #[test]
    fn problem_with_unknown_object() {
        let d = parse_domain(BLOCKS).unwrap();
        let err = parse_problem(
            "(define (problem t) (:domain blocks) (:objects a - block) (:init (clear z)) (:goal (clear a)))",
            &d,
        )
        .unwrap_err();
        assert!(matches!(err, StripsError::UndeclaredConstant { ref name, .. } if name == "z"));
    }
}
