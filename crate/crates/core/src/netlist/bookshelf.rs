//! Bookshelf (`.aux/.nodes/.nets/.pl/.scl/.wts`) reader and writer.
//!
//! Bookshelf `.pl` files store lower-left corners; everything inside the crate uses
//! node centers, so conversion happens here and nowhere else. Pin offsets in `.nets`
//! are relative to the node center; a pin line without offsets sits at the center.
//!
//! Bookshelf has no macro flag. Non-terminal nodes taller than the standard row
//! height (first row of the `.scl`, or the smallest node height when no `.scl` is
//! given) are read as macros.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::geom::{Orientation, Point};

use super::{Canvas, Net, Netlist, Node, NodeKind, Pin, Placement};

const KIND_EPS: f64 = 1e-9;

/// Paths of one Bookshelf design. Only `.nodes` and `.nets` are mandatory.
#[derive(Debug, Clone, Default)]
pub struct BookshelfFiles {
    pub nodes: PathBuf,
    pub nets: PathBuf,
    pub pl: Option<PathBuf>,
    pub scl: Option<PathBuf>,
    pub wts: Option<PathBuf>,
}

impl BookshelfFiles {
    /// Reads the file manifest from an `.aux` file. Listed files are resolved relative
    /// to the `.aux` directory.
    pub fn from_aux(aux: &Path) -> Result<Self> {
        let text = read(aux)?;
        let dir = aux.parent().unwrap_or_else(|| Path::new(""));
        let mut files = BookshelfFiles::default();
        let (mut have_nodes, mut have_nets) = (false, false);
        for (idx, line) in text.lines().enumerate() {
            let line = strip_comment(line);
            let Some((_, list)) = line.split_once(':') else {
                continue;
            };
            for name in list.split_whitespace() {
                let path = dir.join(name);
                match Path::new(name).extension().and_then(|e| e.to_str()) {
                    Some("nodes") => {
                        files.nodes = path;
                        have_nodes = true;
                    }
                    Some("nets") => {
                        files.nets = path;
                        have_nets = true;
                    }
                    Some("pl") => files.pl = Some(path),
                    Some("scl") => files.scl = Some(path),
                    Some("wts") => files.wts = Some(path),
                    Some(_) | None => {
                        log::debug!("{}:{}: ignoring `{name}`", aux.display(), idx + 1);
                    }
                }
            }
        }
        if !(have_nodes && have_nets) {
            return Err(Error::Parse {
                file: aux.display().to_string(),
                line: 0,
                reason: "aux file must list a .nodes and a .nets file".into(),
            });
        }
        Ok(files)
    }
}

/// Parses a design from its `.aux` manifest.
pub fn parse_bookshelf(aux: &Path) -> Result<(Netlist, Option<Placement>)> {
    parse_files(&BookshelfFiles::from_aux(aux)?)
}

/// Parses a design from explicit file paths. Returns a placement when a `.pl` is given.
pub fn parse_files(files: &BookshelfFiles) -> Result<(Netlist, Option<Placement>)> {
    let nodes_src = Source::load(&files.nodes)?;
    let raw_nodes = parse_nodes(&nodes_src)?;

    let rows = match &files.scl {
        Some(p) => Some(parse_scl(&Source::load(p)?)?),
        None => None,
    };
    let row_height = match &rows {
        Some(r) => r.row_height,
        None => raw_nodes
            .iter()
            .filter(|n| !n.terminal)
            .map(|n| n.height)
            .fold(f64::INFINITY, f64::min),
    };

    let mut nodes: Vec<Node> = raw_nodes
        .iter()
        .map(|r| {
            let kind = if r.terminal {
                NodeKind::FixedPad
            } else if r.height > row_height + KIND_EPS {
                NodeKind::Macro
            } else {
                NodeKind::StdCell
            };
            Node::new(r.name.clone(), r.width, r.height, kind)
        })
        .collect();
    let index: HashMap<&str, usize> = raw_nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.name.as_str(), i))
        .collect();
    if index.len() != raw_nodes.len() {
        return Err(Error::Validation(format!(
            "{}: duplicate node names",
            files.nodes.display()
        )));
    }

    let nets_src = Source::load(&files.nets)?;
    let mut nets = parse_nets(&nets_src, &index)?;

    if let Some(p) = &files.wts {
        apply_weights(&Source::load(p)?, &mut nets)?;
    }

    let placed = match &files.pl {
        Some(p) => Some(parse_pl(&Source::load(p)?, &index, &nodes)?),
        None => None,
    };
    if let Some(pl) = &placed {
        for (i, fixed) in pl.fixed.iter().enumerate() {
            if *fixed {
                nodes[i].movable = false;
            }
        }
    }

    let canvas = match (&rows, &placed) {
        (Some(r), _) => Canvas::new(r.width, r.height)?,
        (None, Some(pl)) => {
            let mut w: f64 = 0.0;
            let mut h: f64 = 0.0;
            for (i, n) in nodes.iter().enumerate() {
                let c = pl.placement.positions[i];
                w = w.max(c.x + n.width / 2.0);
                h = h.max(c.y + n.height / 2.0);
            }
            Canvas::new(w, h)?
        }
        (None, None) => {
            return Err(Error::Validation(
                "cannot determine the canvas: need a .scl or a .pl file".into(),
            ))
        }
    };

    let netlist = Netlist::new(canvas, nodes, nets)?;
    Ok((netlist, placed.map(|p| p.placement)))
}

/// Reads only a `.pl` file against an existing netlist (for warm starts).
pub fn read_placement(netlist: &Netlist, path: &Path) -> Result<Placement> {
    let index: HashMap<&str, usize> = netlist
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, n)| (n.name.as_str(), i))
        .collect();
    Ok(parse_pl(&Source::load(path)?, &index, netlist.nodes())?.placement)
}

/// Writes a `.pl` file. Centers are converted to lower-left corners; non-movable
/// nodes carry `/FIXED`.
pub fn write_placement(netlist: &Netlist, placement: &Placement, path: &Path) -> Result<()> {
    placement.check_covers(netlist)?;
    write(path, &format_pl(netlist, placement))
}

/// Serializes a placement in `.pl` syntax.
pub fn format_pl(netlist: &Netlist, placement: &Placement) -> String {
    let mut out = String::from("UCLA pl 1.0\n\n");
    for (i, n) in netlist.nodes().iter().enumerate() {
        let c = placement.pos(i);
        let _ = write!(
            out,
            "{}\t{}\t{}\t: {}",
            n.name,
            c.x - n.width / 2.0,
            c.y - n.height / 2.0,
            placement.orient(i)
        );
        if !n.movable {
            out.push_str(" /FIXED");
        }
        out.push('\n');
    }
    out
}

/// Writes a complete design (`.aux`, `.nodes`, `.nets`, `.scl`, plus `.pl` when a
/// placement is given and `.wts` when any net weight differs from 1). Returns the
/// path of the `.aux` file.
pub fn write_bookshelf(
    netlist: &Netlist,
    placement: Option<&Placement>,
    dir: &Path,
    design: &str,
) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut listed = vec![format!("{design}.nodes"), format!("{design}.nets")];

    let terminals = netlist.nodes().iter().filter(|n| n.kind == NodeKind::FixedPad).count();
    let mut nodes = format!(
        "UCLA nodes 1.0\n\nNumNodes : {}\nNumTerminals : {}\n",
        netlist.num_nodes(),
        terminals
    );
    for n in netlist.nodes() {
        let _ = write!(nodes, "\t{}\t{}\t{}", n.name, n.width, n.height);
        if n.kind == NodeKind::FixedPad {
            nodes.push_str("\tterminal");
        }
        nodes.push('\n');
    }
    write(&dir.join(&listed[0]), &nodes)?;

    let num_pins: usize = netlist.nets().iter().map(|n| n.pins.len()).sum();
    let mut nets = format!(
        "UCLA nets 1.0\n\nNumNets : {}\nNumPins : {}\n",
        netlist.num_nets(),
        num_pins
    );
    for net in netlist.nets() {
        let _ = writeln!(nets, "NetDegree : {} {}", net.pins.len(), net.name);
        for pin in &net.pins {
            let _ = writeln!(
                nets,
                "\t{}\tB : {}\t{}",
                netlist.node(pin.node).name,
                pin.dx,
                pin.dy
            );
        }
    }
    write(&dir.join(&listed[1]), &nets)?;

    if netlist.nets().iter().any(|n| n.weight != 1.0) {
        let name = format!("{design}.wts");
        let mut wts = String::from("UCLA wts 1.0\n\n");
        for net in netlist.nets() {
            let _ = writeln!(wts, "{}\t{}", net.name, net.weight);
        }
        write(&dir.join(&name), &wts)?;
        listed.push(name);
    }

    if let Some(pl) = placement {
        let name = format!("{design}.pl");
        write_placement(netlist, pl, &dir.join(&name))?;
        listed.push(name);
    }

    let name = format!("{design}.scl");
    write(&dir.join(&name), &format_scl(netlist))?;
    listed.push(name);

    let aux = dir.join(format!("{design}.aux"));
    write(&aux, &format!("RowBasedPlacement : {}\n", listed.join(" ")))?;
    Ok(aux)
}

/// Rows of standard-cell height tiling the canvas; the last row absorbs the remainder.
/// The row height doubles as the macro/standard-cell discriminator on read-back.
fn format_scl(netlist: &Netlist) -> String {
    let canvas = netlist.canvas();
    let cell_h = netlist
        .nodes()
        .iter()
        .filter(|n| n.is_std_cell())
        .map(|n| n.height)
        .fold(f64::NEG_INFINITY, f64::max);
    let macro_h = netlist
        .nodes()
        .iter()
        .filter(|n| n.is_macro())
        .map(|n| n.height)
        .fold(f64::INFINITY, f64::min);
    let mut row_h = if cell_h.is_finite() && cell_h > 0.0 {
        cell_h
    } else if macro_h.is_finite() && macro_h > 0.0 {
        macro_h / 2.0
    } else {
        canvas.height
    };
    row_h = row_h.min(canvas.height);

    let mut coords = Vec::new();
    let mut y = 0.0;
    while y < canvas.height - KIND_EPS {
        let h = row_h.min(canvas.height - y);
        coords.push((y, h));
        y = coords.len() as f64 * row_h;
    }
    let mut out = format!("UCLA scl 1.0\n\nNumRows : {}\n\n", coords.len());
    for (y, h) in coords {
        let _ = write!(
            out,
            "CoreRow Horizontal\n Coordinate : {y}\n Height : {h}\n Sitewidth : {w}\n Sitespacing : {w}\n Siteorient : N\n Sitesymmetry : Y\n SubrowOrigin : 0 NumSites : 1\nEnd\n",
            w = canvas.width
        );
    }
    out
}

struct Source {
    name: String,
    text: String,
}

impl Source {
    fn load(path: &Path) -> Result<Self> {
        Ok(Source {
            name: path.display().to_string(),
            text: read(path)?,
        })
    }

    #[cfg(test)]
    fn inline(name: &str, text: &str) -> Self {
        Source {
            name: name.into(),
            text: text.into(),
        }
    }

    /// Non-empty, comment-stripped lines with their 1-based numbers; `UCLA` headers skipped.
    fn records(&self) -> impl Iterator<Item = (usize, Vec<&str>)> {
        self.text.lines().enumerate().filter_map(|(i, line)| {
            let toks: Vec<&str> = strip_comment(line).split_whitespace().collect();
            if toks.is_empty() || toks[0] == "UCLA" {
                None
            } else {
                Some((i + 1, toks))
            }
        })
    }

    fn err(&self, line: usize, reason: impl Into<String>) -> Error {
        Error::Parse {
            file: self.name.clone(),
            line,
            reason: reason.into(),
        }
    }

    fn num(&self, line: usize, tok: &str, what: &str) -> Result<f64> {
        tok.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| self.err(line, format!("invalid {what} `{tok}`")))
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn is_header_kv(toks: &[&str]) -> bool {
    toks.len() >= 2 && toks[1] == ":" && toks[0].starts_with("Num")
}

struct RawNode {
    name: String,
    width: f64,
    height: f64,
    terminal: bool,
}

fn parse_nodes(src: &Source) -> Result<Vec<RawNode>> {
    let mut out = Vec::new();
    for (line, toks) in src.records() {
        if is_header_kv(&toks) {
            continue;
        }
        if toks.len() < 3 {
            return Err(src.err(line, "expected `name width height [terminal]`"));
        }
        let width = src.num(line, toks[1], "width")?;
        let height = src.num(line, toks[2], "height")?;
        let terminal = match toks.get(3) {
            None => false,
            Some(&"terminal") | Some(&"terminal_NI") => true,
            Some(other) => return Err(src.err(line, format!("unexpected node attribute `{other}`"))),
        };
        out.push(RawNode {
            name: toks[0].to_string(),
            width,
            height,
            terminal,
        });
    }
    Ok(out)
}

fn parse_nets(src: &Source, index: &HashMap<&str, usize>) -> Result<Vec<Net>> {
    let mut nets: Vec<Net> = Vec::new();
    let mut pending = 0usize;
    let mut last_line = 0;
    for (line, toks) in src.records() {
        last_line = line;
        if toks[0] == "NetDegree" {
            if pending > 0 {
                return Err(src.err(line, format!("previous net is missing {pending} pin line(s)")));
            }
            if toks.len() < 3 || toks[1] != ":" {
                return Err(src.err(line, "expected `NetDegree : k [name]`"));
            }
            pending = toks[2]
                .parse()
                .map_err(|_| src.err(line, format!("invalid net degree `{}`", toks[2])))?;
            let name = toks
                .get(3)
                .map(|s| s.to_string())
                .unwrap_or_else(|| format!("net{}", nets.len()));
            nets.push(Net::new(name, Vec::with_capacity(pending)));
            continue;
        }
        if is_header_kv(&toks) {
            continue;
        }
        if pending == 0 {
            return Err(src.err(line, "pin line outside of a NetDegree block"));
        }
        let node = *index
            .get(toks[0])
            .ok_or_else(|| Error::Validation(format!("{}:{line}: unknown node `{}`", src.name, toks[0])))?;
        let (dx, dy) = match toks.iter().position(|t| *t == ":") {
            Some(c) if toks.len() >= c + 3 => (
                src.num(line, toks[c + 1], "pin offset")?,
                src.num(line, toks[c + 2], "pin offset")?,
            ),
            Some(c) if toks.len() > c + 1 => return Err(src.err(line, "pin offset needs two values")),
            _ => (0.0, 0.0),
        };
        nets.last_mut().expect("inside a block").pins.push(Pin::new(node, dx, dy));
        pending -= 1;
    }
    if pending > 0 {
        return Err(src.err(last_line, format!("last net is missing {pending} pin line(s)")));
    }
    Ok(nets)
}

fn apply_weights(src: &Source, nets: &mut [Net]) -> Result<()> {
    let index: HashMap<String, usize> = nets
        .iter()
        .enumerate()
        .map(|(i, n)| (n.name.clone(), i))
        .collect();
    for (line, toks) in src.records() {
        if toks.len() < 2 {
            return Err(src.err(line, "expected `name weight`"));
        }
        let w = src.num(line, toks[1], "weight")?;
        // Weights for names that are not nets (node weights in some releases) are ignored.
        if let Some(&i) = index.get(toks[0]) {
            nets[i].weight = w;
        }
    }
    Ok(())
}

struct ParsedPl {
    placement: Placement,
    fixed: Vec<bool>,
}

fn parse_pl(src: &Source, index: &HashMap<&str, usize>, nodes: &[Node]) -> Result<ParsedPl> {
    let mut placement = Placement::filled(nodes.len(), Point::new(f64::NAN, f64::NAN));
    let mut fixed = vec![false; nodes.len()];
    for (line, toks) in src.records() {
        if toks.len() < 3 {
            return Err(src.err(line, "expected `name x y [: orient] [/FIXED]`"));
        }
        let i = *index
            .get(toks[0])
            .ok_or_else(|| Error::Validation(format!("{}:{line}: unknown node `{}`", src.name, toks[0])))?;
        let x = src.num(line, toks[1], "x")?;
        let y = src.num(line, toks[2], "y")?;
        let mut rest = toks[3..].iter().peekable();
        if rest.peek() == Some(&&":") {
            rest.next();
            if let Some(o) = rest.next() {
                placement.orients[i] = o.parse::<Orientation>().map_err(|e| src.err(line, e))?;
            }
        }
        for attr in rest {
            match *attr {
                "/FIXED" | "/FIXED_NI" => fixed[i] = true,
                other => return Err(src.err(line, format!("unexpected attribute `{other}`"))),
            }
        }
        let n = &nodes[i];
        placement.positions[i] = Point::new(x + n.width / 2.0, y + n.height / 2.0);
    }
    if let Some(i) = (0..nodes.len()).find(|&i| placement.get(i).is_none()) {
        return Err(Error::Validation(format!(
            "{}: node `{}` has no location",
            src.name, nodes[i].name
        )));
    }
    Ok(ParsedPl { placement, fixed })
}

struct Rows {
    width: f64,
    height: f64,
    row_height: f64,
}

fn parse_scl(src: &Source) -> Result<Rows> {
    let mut width: f64 = 0.0;
    let mut height: f64 = 0.0;
    let mut row_height = None;
    let (mut coord, mut h, mut site_w, mut spacing) = (0.0, 0.0, 1.0, None);
    let (mut origin, mut sites) = (0.0, 0.0);
    let mut in_row = false;
    for (line, toks) in src.records() {
        match toks[0] {
            "CoreRow" => {
                in_row = true;
                (coord, h, site_w, spacing, origin, sites) = (0.0, 0.0, 1.0, None, 0.0, 0.0);
            }
            "End" if in_row => {
                in_row = false;
                row_height.get_or_insert(h);
                height = height.max(coord + h);
                width = width.max(origin + sites * spacing.unwrap_or(site_w));
            }
            "Coordinate" => coord = src.num(line, toks.get(2).unwrap_or(&""), "Coordinate")?,
            "Height" => h = src.num(line, toks.get(2).unwrap_or(&""), "Height")?,
            "Sitewidth" => site_w = src.num(line, toks.get(2).unwrap_or(&""), "Sitewidth")?,
            "Sitespacing" => spacing = Some(src.num(line, toks.get(2).unwrap_or(&""), "Sitespacing")?),
            "SubrowOrigin" => {
                origin = src.num(line, toks.get(2).unwrap_or(&""), "SubrowOrigin")?;
                if let Some(p) = toks.iter().position(|t| t.eq_ignore_ascii_case("NumSites")) {
                    sites = src.num(line, toks.get(p + 2).unwrap_or(&""), "NumSites")?;
                }
            }
            _ => {}
        }
    }
    let row_height = row_height.ok_or_else(|| src.err(0, "no CoreRow blocks"))?;
    Ok(Rows {
        width,
        height,
        row_height,
    })
}
