//! HTML decoding and the DOM queries shared by text analysis, link
//! extraction and document dating.

use std::collections::HashSet;
use std::sync::OnceLock;

use ego_tree::NodeRef;
use encoding_rs::{Encoding, UTF_8, WINDOWS_1252};
use regex::bytes::Regex;
use scraper::{Html, Node, Selector};
use url::Url;

use crate::archive::{canonicalize, ArchivedDocument};

const SKIPPED_ELEMENTS: &[&str] = &["script", "style", "noscript", "template"];

const BLOCK_ELEMENTS: &[&str] = &[
    "address", "article", "aside", "blockquote", "br", "dd", "div", "dl", "dt", "fieldset",
    "figcaption", "figure", "footer", "form", "h1", "h2", "h3", "h4", "h5", "h6", "header", "hr",
    "li", "main", "nav", "ol", "option", "p", "pre", "section", "table", "td", "th", "title", "tr",
    "ul",
];

fn selector(cell: &'static OnceLock<Selector>, css: &str) -> &'static Selector {
    cell.get_or_init(|| Selector::parse(css).expect("static selector"))
}

fn charset_from_content_type(content_type: &str) -> Option<&'static Encoding> {
    content_type
        .split(';')
        .filter_map(|p| p.trim().split_once('='))
        .find(|(k, _)| k.trim().eq_ignore_ascii_case("charset"))
        .and_then(|(_, v)| Encoding::for_label(v.trim().trim_matches('"').as_bytes()))
}

fn charset_from_meta(body: &[u8]) -> Option<&'static Encoding> {
    static META: OnceLock<Regex> = OnceLock::new();
    let re = META.get_or_init(|| {
        Regex::new(r#"(?i)<meta[^>]+charset\s*=\s*["']?([A-Za-z0-9_\-:]+)"#).expect("static regex")
    });
    let head = &body[..body.len().min(2048)];
    re.captures(head)
        .and_then(|c| Encoding::for_label(c.get(1)?.as_bytes()))
}

/// Decodes an HTML payload. The declared charset (header, then meta tag)
/// wins; otherwise UTF-8 if valid, else Windows-1252. Never fails.
pub fn decode_body(body: &[u8], content_type: Option<&str>) -> String {
    let declared = content_type
        .and_then(charset_from_content_type)
        .or_else(|| charset_from_meta(body));
    let encoding = match declared {
        Some(e) => e,
        None if std::str::from_utf8(body).is_ok() => UTF_8,
        None => WINDOWS_1252,
    };
    let (text, _, _) = encoding.decode(body);
    text.into_owned()
}

/// A parsed HTML page together with the URL it was captured under.
pub struct Page {
    html: Html,
    url: Option<Url>,
}

impl Page {
    pub fn parse(doc: &ArchivedDocument) -> Page {
        let text = decode_body(doc.body(), doc.header("Content-Type"));
        Page::from_html(&text, Some(doc.url()))
    }

    pub fn from_html(html: &str, url: Option<&str>) -> Page {
        Page {
            html: Html::parse_document(html),
            url: url.and_then(|u| Url::parse(u).ok()),
        }
    }

    /// Visible text: tags stripped, script/style dropped, entities decoded,
    /// whitespace collapsed.
    pub fn text(&self) -> String {
        let mut raw = String::new();
        collect_text(self.html.tree.root(), &mut raw);
        raw.split_whitespace().collect::<Vec<_>>().join(" ")
    }

    /// Effective base URL: an in-page `<base href>` resolved against the
    /// capture URL, or the capture URL itself.
    pub fn base_url(&self) -> Option<Url> {
        static BASE: OnceLock<Selector> = OnceLock::new();
        let base_href = self
            .html
            .select(selector(&BASE, "base[href]"))
            .next()
            .and_then(|e| e.value().attr("href"));
        match (base_href, &self.url) {
            (Some(href), Some(url)) => url.join(href.trim()).ok().or_else(|| Some(url.clone())),
            (Some(href), None) => Url::parse(href.trim()).ok(),
            (None, url) => url.clone(),
        }
    }

    /// Canonical http(s) targets of all anchors, first occurrence order.
    pub fn outlinks(&self) -> Vec<String> {
        static ANCHOR: OnceLock<Selector> = OnceLock::new();
        let base = self.base_url();
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for a in self.html.select(selector(&ANCHOR, "a[href]")) {
            let href = a.value().attr("href").unwrap_or("").trim();
            if href.is_empty() || href.starts_with('#') {
                continue;
            }
            if let Ok(url) = canonicalize(href, base.as_ref()) {
                let s = String::from(url);
                if seen.insert(s.clone()) {
                    out.push(s);
                }
            }
        }
        out
    }

    /// `content` of the first `<meta>` whose `name`, `property` or
    /// `itemprop` equals `key` (case-insensitive).
    pub fn meta_content(&self, key: &str) -> Option<String> {
        static META: OnceLock<Selector> = OnceLock::new();
        self.html.select(selector(&META, "meta[content]")).find_map(|m| {
            let el = m.value();
            let matches = ["name", "property", "itemprop", "http-equiv"]
                .iter()
                .filter_map(|attr| el.attr(attr))
                .any(|v| v.trim().eq_ignore_ascii_case(key));
            if matches {
                el.attr("content").map(|c| c.trim().to_string())
            } else {
                None
            }
        })
    }

    /// `datetime` attributes of `<time>` elements in document order.
    pub fn time_datetimes(&self) -> Vec<String> {
        static TIME: OnceLock<Selector> = OnceLock::new();
        self.html
            .select(selector(&TIME, "time[datetime]"))
            .filter_map(|t| t.value().attr("datetime"))
            .map(|s| s.trim().to_string())
            .collect()
    }
}

fn collect_text(node: NodeRef<'_, Node>, out: &mut String) {
    for child in node.children() {
        match child.value() {
            Node::Text(t) => out.push_str(t),
            Node::Element(e) => {
                let name = e.name();
                if SKIPPED_ELEMENTS.contains(&name) {
                    continue;
                }
                let block = BLOCK_ELEMENTS.contains(&name);
                if block {
                    out.push(' ');
                }
                collect_text(child, out);
                if block {
                    out.push(' ');
                }
            }
            _ => collect_text(child, out),
        }
    }
}

/// Visible text of an HTML fragment or document.
pub fn html_to_text(html: &str) -> String {
    Page::from_html(html, None).text()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strips_tags() {
        assert_eq!(html_to_text("<p>Hello <b>World</b></p>"), "Hello World");
        assert_eq!(html_to_text("<script>var x=1;</script>Text"), "Text");
        assert_eq!(html_to_text("&amp;"), "&");
        assert_eq!(html_to_text("<style>p{}</style><p>a</p><p>b</p>"), "a b");
    }

    #[test]
    fn links_resolved_filtered_deduped() {
        let page = Page::from_html(
            r##"<a href="/a">1</a><a href="b.html">2</a><a href="#frag">3</a>
                <a href="mailto:x">4</a><a href="/a#z">5</a>"##,
            Some("http://e.de/d/"),
        );
        assert_eq!(page.outlinks(), ["http://e.de/a", "http://e.de/d/b.html"]);
        assert!(Page::from_html("<p>none</p>", Some("http://e.de/")).outlinks().is_empty());
    }

    #[test]
    fn base_element_honored() {
        let page = Page::from_html(
            r#"<head><base href="http://other.de/root/"></head><a href="x">x</a>"#,
            Some("http://e.de/d/"),
        );
        assert_eq!(page.outlinks(), ["http://other.de/root/x"]);
    }

    #[test]
    fn decodes_latin1_fallback() {
        let body = b"<p>Gr\xfc\xdfe</p>";
        assert_eq!(decode_body(body, None), "<p>Grüße</p>");
        let body = "<p>Grüße</p>".as_bytes();
        assert_eq!(decode_body(body, Some("text/html; charset=utf-8")), "<p>Grüße</p>");
    }

    #[test]
    fn meta_lookup() {
        let page = Page::from_html(
            r#"<meta property="article:published_time" content="2011-03-12T09:00:00Z">
               <meta name="DC.date.issued" content="2010-01-01">"#,
            None,
        );
        assert_eq!(
            page.meta_content("article:published_time").as_deref(),
            Some("2011-03-12T09:00:00Z")
        );
        assert_eq!(page.meta_content("dc.date.issued").as_deref(), Some("2010-01-01"));
        assert!(page.meta_content("date").is_none());
    }
}
