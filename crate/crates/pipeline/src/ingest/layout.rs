//! Reading-order reconstruction from positioned glyphs.
//!
//! Glyphs are grouped into horizontal fragments, columns are found as
//! vertical gutters no fragment crosses, and each band between full-width
//! lines is read column by column. Footnote lines (smaller type below the
//! body text) are moved up to the line that carries their marker.

/// One decoded character with its position in top-down page coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Glyph {
    pub x: f64,
    /// Baseline, measured from the top of the page.
    pub y: f64,
    /// Advance width in page units.
    pub width: f64,
    pub size: f64,
    pub text: String,
}

#[derive(Debug, Clone, Default)]
pub struct Page {
    pub width: f64,
    pub height: f64,
    pub glyphs: Vec<Glyph>,
}

/// Minimum empty horizontal span, in points, that counts as a column gutter.
const MIN_GUTTER: f64 = 8.0;
/// Glyph gap (in font sizes) that separates words.
const WORD_GAP: f64 = 0.15;
/// Glyph gap (in font sizes) that splits a line into separate fragments.
const FRAGMENT_GAP: f64 = 1.5;
const SMALL_TYPE: f64 = 0.85;

#[derive(Debug, Clone)]
struct Fragment {
    x0: f64,
    x1: f64,
    y: f64,
    size: f64,
    glyphs: Vec<Glyph>,
}

impl Fragment {
    fn from_glyph(g: Glyph) -> Self {
        Fragment {
            x0: g.x,
            x1: g.x + g.width,
            y: g.y,
            size: g.size,
            glyphs: vec![g],
        }
    }

    fn text(&self) -> String {
        let mut out = String::new();
        let mut last_end: Option<f64> = None;
        for g in &self.glyphs {
            if let Some(end) = last_end {
                if g.x - end > WORD_GAP * g.size.max(1.0) && !out.ends_with(' ') && g.text != " " {
                    out.push(' ');
                }
            }
            out.push_str(&g.text);
            last_end = Some(g.x + g.width);
        }
        out.trim().to_string()
    }
}

/// Splits content-order glyphs into runs on one baseline without large gaps.
fn fragments(glyphs: &[Glyph]) -> Vec<Fragment> {
    let mut out: Vec<Fragment> = Vec::new();
    for g in glyphs.iter().filter(|g| !g.text.is_empty()) {
        if let Some(cur) = out.last_mut() {
            let same_line = (g.y - cur.y).abs() < 0.5 * cur.size.max(g.size);
            let gap = g.x - cur.x1;
            if same_line && gap > -0.5 * g.size && gap < FRAGMENT_GAP * cur.size.max(g.size) {
                cur.x1 = cur.x1.max(g.x + g.width);
                // the body-size glyphs define the fragment's baseline and size
                if g.size > cur.size {
                    cur.size = g.size;
                    cur.y = g.y;
                }
                cur.glyphs.push(g.clone());
                continue;
            }
        }
        if g.text.trim().is_empty() {
            continue;
        }
        out.push(Fragment::from_glyph(g.clone()));
    }
    for f in &mut out {
        while f.glyphs.last().is_some_and(|g| g.text.trim().is_empty()) {
            f.glyphs.pop();
        }
        if let Some(last) = f.glyphs.last() {
            f.x1 = last.x + last.width;
        }
    }
    out.retain(|f| !f.glyphs.is_empty());
    out
}

/// Column boundaries as x positions of gutter centres, left to right.
fn gutters(frags: &[Fragment]) -> Vec<f64> {
    if frags.len() < 4 {
        return Vec::new();
    }
    let min_x = frags.iter().map(|f| f.x0).fold(f64::INFINITY, f64::min);
    let max_x = frags.iter().map(|f| f.x1).fold(f64::NEG_INFINITY, f64::max);
    let bins = ((max_x - min_x).ceil() as usize).max(1);
    let mut cover = vec![0usize; bins + 1];
    for f in frags {
        let a = ((f.x0 - min_x).floor() as usize).min(bins);
        let b = ((f.x1 - min_x).ceil() as usize).min(bins);
        for c in &mut cover[a..b.max(a)] {
            *c += 1;
        }
    }
    // full-width lines such as titles cross the gutter; tolerate a few
    let tolerance = frags.len() / 20;
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, &c) in cover.iter().enumerate() {
        if c <= tolerance {
            start.get_or_insert(i);
        } else if let Some(s) = start.take() {
            if (i - s) as f64 >= MIN_GUTTER && s > 0 {
                out.push(min_x + (s + i) as f64 / 2.0);
            }
        }
    }
    // a gutter only counts when both sides carry a real share of the text
    out.retain(|&g| {
        let left = frags.iter().filter(|f| f.x1 <= g).count();
        let right = frags.iter().filter(|f| f.x0 >= g).count();
        left * 5 >= frags.len() && right * 5 >= frags.len()
    });
    out
}

fn column_of(f: &Fragment, gutters: &[f64]) -> Option<usize> {
    let mut col = 0;
    for &g in gutters {
        if f.x0 < g && f.x1 > g {
            return None;
        }
        if f.x0 >= g {
            col += 1;
        }
    }
    Some(col)
}

#[derive(Debug, Clone)]
struct Line {
    y: f64,
    size: f64,
    text: String,
    /// Small raised digit runs inside the line, e.g. footnote references.
    markers: Vec<String>,
}

fn build_lines(mut frags: Vec<Fragment>) -> Vec<Line> {
    frags.sort_by(|a, b| a.y.total_cmp(&b.y).then(a.x0.total_cmp(&b.x0)));
    let mut groups: Vec<Vec<Fragment>> = Vec::new();
    for f in frags {
        match groups.last_mut() {
            Some(g) if (g[0].y - f.y).abs() < 0.5 * g[0].size.max(f.size) => g.push(f),
            _ => groups.push(vec![f]),
        }
    }
    groups
        .into_iter()
        .map(|mut g| {
            g.sort_by(|a, b| a.x0.total_cmp(&b.x0));
            let size = g.iter().map(|f| f.size).fold(0.0, f64::max);
            // baseline of the largest type on the line
            let y = g.iter().max_by(|a, b| a.size.total_cmp(&b.size)).map_or(0.0, |f| f.y);
            let text = g.iter().map(Fragment::text).collect::<Vec<_>>().join(" ");
            let markers = g.iter().flat_map(|f| raised_markers(f, size, y)).collect();
            Line { y, size, text, markers }
        })
        .collect()
}

fn raised_markers(f: &Fragment, line_size: f64, baseline: f64) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for g in &f.glyphs {
        let raised = g.size < SMALL_TYPE * line_size && g.y < baseline - 0.15 * line_size;
        if raised && g.text.chars().all(|c| c.is_ascii_digit()) {
            cur.push_str(&g.text);
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn body_size(glyphs: &[Glyph]) -> f64 {
    let mut counts: Vec<(i64, usize)> = Vec::new();
    for g in glyphs.iter().filter(|g| !g.text.trim().is_empty()) {
        let key = (g.size * 10.0).round() as i64;
        match counts.iter_mut().find(|(k, _)| *k == key) {
            Some(e) => e.1 += 1,
            None => counts.push((key, 1)),
        }
    }
    counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .map_or(10.0, |(k, _)| k as f64 / 10.0)
}

/// Lays out one page as text lines in reading order.
pub fn page_lines(page: &Page) -> Vec<String> {
    let frags = fragments(&page.glyphs);
    if frags.is_empty() {
        return Vec::new();
    }
    let body = body_size(&page.glyphs);
    let gutters = gutters(&frags);

    // Bands are separated by fragments that span a gutter.
    let mut sorted = frags;
    sorted.sort_by(|a, b| a.y.total_cmp(&b.y).then(a.x0.total_cmp(&b.x0)));
    let mut ordered: Vec<Line> = Vec::new();
    let mut band: Vec<Vec<Fragment>> = vec![Vec::new(); gutters.len() + 1];
    let mut spanning: Vec<Fragment> = Vec::new();
    let flush = |band: &mut Vec<Vec<Fragment>>, out: &mut Vec<Line>| {
        for col in band.iter_mut() {
            out.extend(build_lines(std::mem::take(col)));
        }
    };
    for f in sorted {
        match column_of(&f, &gutters) {
            Some(c) => {
                if !spanning.is_empty() {
                    ordered.extend(build_lines(std::mem::take(&mut spanning)));
                }
                band[c].push(f);
            }
            None => {
                flush(&mut band, &mut ordered);
                spanning.push(f);
            }
        }
    }
    ordered.extend(build_lines(spanning));
    flush(&mut band, &mut ordered);

    place_footnotes(ordered, body)
}

/// Moves trailing small-type blocks next to the line holding their marker.
fn place_footnotes(lines: Vec<Line>, body: f64) -> Vec<String> {
    let is_small = |l: &Line| l.size < SMALL_TYPE * body;
    let last_body_y = lines
        .iter()
        .filter(|l| !is_small(l))
        .map(|l| l.y)
        .fold(f64::NEG_INFINITY, f64::max);
    let (mut body_lines, notes): (Vec<Line>, Vec<Line>) = lines
        .into_iter()
        .partition(|l| !(is_small(l) && l.y > last_body_y));

    // consecutive note lines form one note unless the next starts a new marker
    let mut blocks: Vec<(Option<String>, String)> = Vec::new();
    for n in notes {
        let lead: String = n.text.chars().take_while(|c| c.is_ascii_digit()).collect();
        if !lead.is_empty() || blocks.is_empty() {
            blocks.push(((!lead.is_empty()).then_some(lead), n.text));
        } else if let Some(last) = blocks.last_mut() {
            last.1 = join_lines(&[std::mem::take(&mut last.1), n.text]);
        }
    }

    let mut trailing = Vec::new();
    let mut inserts: Vec<(usize, String)> = Vec::new();
    for (marker, text) in blocks {
        let anchor = marker
            .as_ref()
            .and_then(|m| body_lines.iter().position(|l| l.markers.iter().any(|x| x == m)));
        match anchor {
            Some(i) => inserts.push((i, text)),
            None => trailing.push(text),
        }
    }
    let mut out: Vec<String> = Vec::new();
    for (i, l) in body_lines.iter_mut().enumerate() {
        out.push(std::mem::take(&mut l.text));
        out.extend(inserts.iter().filter(|(at, _)| *at == i).map(|(_, t)| t.clone()));
    }
    out.extend(trailing);
    out
}

/// Joins lines with newlines, rejoining words hyphenated at a line break.
pub fn join_lines(lines: &[String]) -> String {
    let mut out = String::new();
    for line in lines.iter().map(|l| l.trim()).filter(|l| !l.is_empty()) {
        if out.is_empty() {
            out.push_str(line);
            continue;
        }
        let hyphenated = out.ends_with('-')
            && out[..out.len() - 1].chars().last().is_some_and(char::is_alphabetic)
            && line.chars().next().is_some_and(char::is_lowercase);
        if hyphenated {
            out.pop();
        } else {
            out.push('\n');
        }
        out.push_str(line);
    }
    out
}

/// Full text of a document: pages laid out independently, separated by a
/// blank line.
pub fn layout_text(pages: &[Page]) -> String {
    pages
        .iter()
        .map(|p| join_lines(&page_lines(p)))
        .filter(|t| !t.is_empty())
        .collect::<Vec<_>>()
        .join("\n\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Glyphs for `text` starting at (x, y), 0.5 em per character.
    fn word(text: &str, x: f64, y: f64, size: f64) -> Vec<Glyph> {
        text.chars()
            .enumerate()
            .map(|(i, c)| Glyph {
                x: x + i as f64 * size * 0.5,
                y,
                width: size * 0.5,
                size,
                text: c.to_string(),
            })
            .collect()
    }

    fn page(glyphs: Vec<Glyph>) -> Page {
        Page { width: 612.0, height: 792.0, glyphs }
    }

    #[test]
    fn single_line() {
        let p = page(word("Hello world", 72.0, 100.0, 10.0));
        assert_eq!(layout_text(&[p]), "Hello world");
    }

    #[test]
    fn gap_becomes_space() {
        let mut g = word("Hello", 72.0, 100.0, 10.0);
        g.extend(word("world", 72.0 + 25.0 + 3.0, 100.0, 10.0));
        assert_eq!(layout_text(&[page(g)]), "Hello world");
    }

    #[test]
    fn two_columns_read_left_then_right() {
        let mut g = Vec::new();
        // emitted row by row across both columns
        for row in 0..6 {
            let y = 100.0 + row as f64 * 12.0;
            g.extend(word(&format!("left{row}"), 72.0, y, 10.0));
            g.extend(word(&format!("right{row}"), 320.0, y, 10.0));
        }
        let text = layout_text(&[page(g)]);
        let expected: Vec<String> = (0..6)
            .map(|r| format!("left{r}"))
            .chain((0..6).map(|r| format!("right{r}")))
            .collect();
        assert_eq!(text, expected.join("\n"));
    }

    #[test]
    fn hyphen_rejoined_only_before_lowercase() {
        let lines = vec!["a reproduc-".to_string(), "ible result".to_string(), "state-".to_string(), "Of".to_string()];
        assert_eq!(join_lines(&lines), "a reproducible result\nstate-\nOf");
    }

    #[test]
    fn footnote_moves_to_marker_line() {
        let mut g = word("Body with note", 72.0, 100.0, 10.0);
        g.push(Glyph { x: 72.0 + 70.0, y: 96.0, width: 3.0, size: 6.0, text: "1".into() });
        g.extend(word("Second body line", 72.0, 112.0, 10.0));
        g.extend(word("Third body line", 72.0, 124.0, 10.0));
        g.extend(word("1 The footnote", 72.0, 700.0, 7.0));
        let text = layout_text(&[page(g)]);
        assert_eq!(text, "Body with note1\n1 The footnote\nSecond body line\nThird body line");
    }

    #[test]
    fn empty_page_gives_empty_text() {
        assert_eq!(layout_text(&[page(Vec::new())]), "");
    }
}
