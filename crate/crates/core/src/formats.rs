//! Line-oriented text formats for the command line: edge lists, PACE tree
//! decompositions, rational matrices, set systems and sparse polynomials.
//!
//! Blank lines and lines starting with `#` are ignored everywhere except in
//! the tree-decomposition format, which uses `c` for comments. Errors carry
//! the 1-based line number.

use crate::error::{Error, Result};
use crate::genpoly::{Graph, SetSystem, TreeDecomposition};
use crate::polycore::{parse_rational, Rational, SparsePolynomial};

fn content_lines<'a>(text: &'a str, comment: &'a str) -> impl Iterator<Item = (usize, Vec<&'a str>)> + 'a {
    text.lines().enumerate().filter_map(move |(i, line)| {
        let line = line.trim();
        if line.is_empty() || line.starts_with(comment) {
            None
        } else {
            Some((i + 1, line.split_whitespace().collect()))
        }
    })
}

fn index(token: &str, line: usize) -> Result<usize> {
    token.parse().map_err(|_| Error::parse(line, format!("expected a nonnegative integer, found {token:?}")))
}

/// Edge list, one `u v` pair per line, vertices 0-based. The vertex count is
/// `max(nvertices, largest index + 1)`.
pub fn parse_graph(text: &str, directed: bool, nvertices: Option<usize>) -> Result<Graph> {
    let mut edges = Vec::new();
    for (line, tokens) in content_lines(text, "#") {
        let [u, v] = tokens[..] else {
            return Err(Error::parse(line, format!("expected \"u v\", found {} fields", tokens.len())));
        };
        let (u, v) = (index(u, line)?, index(v, line)?);
        if u == v {
            return Err(Error::parse(line, format!("self-loop at vertex {u}")));
        }
        edges.push((u, v));
    }
    let n = edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0).max(nvertices.unwrap_or(0));
    Graph::new(n, directed, &edges)
}

pub fn format_graph(g: &Graph) -> String {
    let mut out = format!("# {} vertices, {}\n", g.n(), if g.is_directed() { "directed" } else { "undirected" });
    for (u, v) in g.arcs() {
        if g.is_directed() || u < v {
            out.push_str(&format!("{u} {v}\n"));
        }
    }
    out
}

/// PACE-2017 `.td` text: `s td <bags> <width+1> <vertices>`, then one
/// `b <id> <v...>` line per bag and one `a b` line per tree edge. Bag ids
/// and vertices are 1-based in the file and 0-based in the result.
pub fn parse_tree_decomposition(text: &str) -> Result<(TreeDecomposition, usize)> {
    let mut lines = content_lines(text, "c");
    let (line, header) = lines.next().ok_or_else(|| Error::parse(1, "missing \"s td\" header"))?;
    let [s, td, nbags, width1, nvertices] = header[..] else {
        return Err(Error::parse(line, "header must be \"s td <bags> <width+1> <vertices>\""));
    };
    if s != "s" || td != "td" {
        return Err(Error::parse(line, "header must start with \"s td\""));
    }
    let (nbags, width1, nvertices) = (index(nbags, line)?, index(width1, line)?, index(nvertices, line)?);
    let mut bags: Vec<Option<Vec<usize>>> = vec![None; nbags];
    let mut edges = Vec::new();
    let one_based = |token: &str, line: usize, bound: usize, what: &str| -> Result<usize> {
        let x = index(token, line)?;
        if x == 0 || x > bound {
            return Err(Error::parse(line, format!("{what} {x} outside 1..={bound}")));
        }
        Ok(x - 1)
    };
    for (line, tokens) in lines {
        if tokens[0] == "b" {
            let id = one_based(tokens.get(1).copied().unwrap_or(""), line, nbags, "bag id")?;
            if bags[id].is_some() {
                return Err(Error::parse(line, format!("bag {} declared twice", id + 1)));
            }
            let bag = tokens[2..]
                .iter()
                .map(|t| one_based(t, line, nvertices, "vertex"))
                .collect::<Result<Vec<_>>>()?;
            if bag.len() > width1 {
                return Err(Error::parse(line, format!("bag has {} vertices, header allows {width1}", bag.len())));
            }
            bags[id] = Some(bag);
        } else {
            let [a, b] = tokens[..] else {
                return Err(Error::parse(line, "expected a bag line \"b ...\" or a tree edge \"a b\""));
            };
            edges.push((one_based(a, line, nbags, "bag id")?, one_based(b, line, nbags, "bag id")?));
        }
    }
    let bags = bags
        .into_iter()
        .enumerate()
        .map(|(i, b)| b.ok_or_else(|| Error::parse(0, format!("bag {} never declared", i + 1))))
        .collect::<Result<Vec<_>>>()?;
    Ok((TreeDecomposition::new(bags, edges), nvertices))
}

pub fn format_tree_decomposition(td: &TreeDecomposition, nvertices: usize) -> String {
    let mut out = format!("s td {} {} {}\n", td.bags().len(), td.width() + 1, nvertices);
    for (i, bag) in td.bags().iter().enumerate() {
        out.push_str(&format!("b {}", i + 1));
        bag.iter().for_each(|v| out.push_str(&format!(" {}", v + 1)));
        out.push('\n');
    }
    for (a, b) in td.tree_edges() {
        out.push_str(&format!("{} {}\n", a + 1, b + 1));
    }
    out
}

/// Whitespace-separated rationals, one row per line, all rows equally long.
pub fn parse_matrix(text: &str) -> Result<Vec<Vec<Rational>>> {
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    for (line, tokens) in content_lines(text, "#") {
        let row = tokens
            .iter()
            .map(|t| parse_rational(t).map_err(|_| Error::parse(line, format!("not a rational number: {t:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::parse(line, format!("row has {} entries, expected {}", row.len(), first.len())));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::parse(1, "empty matrix"));
    }
    Ok(rows)
}

/// One set per line as 0-based element indices. The ground set is
/// `0..k*r` where `r` is the common set size.
pub fn parse_set_system(text: &str, k: usize) -> Result<SetSystem> {
    let mut sets = Vec::new();
    for (line, tokens) in content_lines(text, "#") {
        sets.push(tokens.iter().map(|t| index(t, line)).collect::<Result<Vec<_>>>()?);
    }
    let r = sets.first().map_or(0, Vec::len);
    if let Some(pos) = sets.iter().position(|s| s.len() != r) {
        return Err(Error::parse(pos + 1, format!("all sets must have {r} elements")));
    }
    SetSystem::new(k * r, k, sets)
}

/// One monomial per line: `coeff e_1 ... e_n`. Every line must have the same
/// number of exponents and the same total degree.
pub fn parse_sparse_polynomial(text: &str) -> Result<SparsePolynomial> {
    let mut terms = Vec::new();
    let mut shape: Option<(usize, u32)> = None;
    for (line, tokens) in content_lines(text, "#") {
        if tokens.len() < 2 {
            return Err(Error::parse(line, "expected a coefficient followed by exponents"));
        }
        let c = parse_rational(tokens[0]).map_err(|_| Error::parse(line, format!("bad coefficient {:?}", tokens[0])))?;
        let exps = tokens[1..]
            .iter()
            .map(|t| t.parse::<u32>().map_err(|_| Error::parse(line, format!("bad exponent {t:?}"))))
            .collect::<Result<Vec<_>>>()?;
        let this = (exps.len(), exps.iter().sum());
        match shape {
            None => shape = Some(this),
            Some(s) if s != this => {
                return Err(Error::parse(
                    line,
                    format!("monomial has {} variables and degree {}, expected {} and {}", this.0, this.1, s.0, s.1),
                ))
            }
            Some(_) => {}
        }
        terms.push((exps, c));
    }
    let (n, d) = shape.ok_or_else(|| Error::parse(1, "empty polynomial"))?;
    SparsePolynomial::from_terms(n, d as usize, terms)
}
