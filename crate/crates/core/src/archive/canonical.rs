use url::{ParseError, Url};

use crate::error::UrlError;

/// Canonical form used for index keys and crawl identity.
///
/// Relative references are resolved against `base`. Scheme and host are
/// lowercased, default ports and fragments dropped, and percent-encoded
/// unreserved characters decoded. The query string is kept verbatim,
/// including parameter order. Only `http` and `https` are accepted.
pub fn canonicalize_url(url: &str, base: Option<&Url>) -> Result<String, UrlError> {
    canonicalize(url, base).map(String::from)
}

/// Same as [`canonicalize_url`] but returns the parsed [`Url`].
pub fn canonicalize(url: &str, base: Option<&Url>) -> Result<Url, UrlError> {
    let trimmed = url.trim();
    if trimmed.is_empty() {
        return Err(UrlError::Empty);
    }
    let parsed = match base {
        Some(b) => b.join(trimmed),
        None => Url::parse(trimmed),
    };
    let mut parsed = parsed.map_err(|e| match e {
        ParseError::RelativeUrlWithoutBase => UrlError::RelativeWithoutBase(trimmed.to_string()),
        other => UrlError::Unparseable {
            url: trimmed.to_string(),
            reason: other.to_string(),
        },
    })?;
    if !matches!(parsed.scheme(), "http" | "https") {
        return Err(UrlError::UnsupportedScheme(parsed.scheme().to_string()));
    }
    if parsed.host_str().is_none_or(str::is_empty) {
        return Err(UrlError::Unparseable {
            url: trimmed.to_string(),
            reason: "missing host".into(),
        });
    }
    parsed.set_fragment(None);

    // Decoding may expose dot segments, so re-parse until stable.
    for _ in 0..4 {
        let decoded = decode_unreserved(parsed.as_str());
        if decoded == parsed.as_str() {
            break;
        }
        parsed = Url::parse(&decoded).map_err(|e| UrlError::Unparseable {
            url: trimmed.to_string(),
            reason: e.to_string(),
        })?;
        parsed.set_fragment(None);
    }
    Ok(parsed)
}

fn is_unreserved(b: u8) -> bool {
    b.is_ascii_alphanumeric() || matches!(b, b'-' | b'.' | b'_' | b'~')
}

fn hex_val(b: u8) -> Option<u8> {
    match b {
        b'0'..=b'9' => Some(b - b'0'),
        b'a'..=b'f' => Some(b - b'a' + 10),
        b'A'..=b'F' => Some(b - b'A' + 10),
        _ => None,
    }
}

fn decode_unreserved(s: &str) -> String {
    let bytes = s.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' && i + 2 < bytes.len() {
            if let (Some(h), Some(l)) = (hex_val(bytes[i + 1]), hex_val(bytes[i + 2])) {
                let c = h * 16 + l;
                if is_unreserved(c) {
                    out.push(c);
                    i += 3;
                    continue;
                }
            }
        }
        out.push(bytes[i]);
        i += 1;
    }
    String::from_utf8(out).expect("decoding ASCII escapes keeps UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lowercases_and_strips() {
        assert_eq!(
            canonicalize_url("HTTP://Example.DE:80/a#frag", None).unwrap(),
            "http://example.de/a"
        );
        assert_eq!(
            canonicalize_url("https://example.de:443/", None).unwrap(),
            "https://example.de/"
        );
        assert_eq!(
            canonicalize_url("http://example.de:8080/", None).unwrap(),
            "http://example.de:8080/"
        );
    }

    #[test]
    fn resolves_relative() {
        let base = Url::parse("http://example.de/x/y").unwrap();
        assert_eq!(
            canonicalize_url("../b", Some(&base)).unwrap(),
            "http://example.de/b"
        );
        assert_eq!(
            canonicalize_url("c?q=1", Some(&base)).unwrap(),
            "http://example.de/x/c?q=1"
        );
    }

    #[test]
    fn rejects_other_schemes_and_bare_relatives() {
        let base = Url::parse("http://example.de/").unwrap();
        assert_eq!(
            canonicalize_url("mailto:x@y", Some(&base)),
            Err(UrlError::UnsupportedScheme("mailto".into()))
        );
        assert!(matches!(
            canonicalize_url("/a", None),
            Err(UrlError::RelativeWithoutBase(_))
        ));
        assert_eq!(canonicalize_url("  ", None), Err(UrlError::Empty));
    }

    #[test]
    fn query_order_preserved() {
        assert_eq!(
            canonicalize_url("http://e.de/p?b=2&a=1", None).unwrap(),
            "http://e.de/p?b=2&a=1"
        );
    }

    #[test]
    fn unreserved_escapes_decoded() {
        assert_eq!(
            canonicalize_url("http://e.de/%7Euser/%41b%2fc", None).unwrap(),
            "http://e.de/~user/Ab%2fc"
        );
        assert_eq!(
            canonicalize_url("http://e.de/a/%2E%2E/b", None).unwrap(),
            "http://e.de/b"
        );
    }

    #[test]
    fn fragment_only_difference() {
        assert_eq!(
            canonicalize_url("http://e.de/page#x", None).unwrap(),
            canonicalize_url("http://e.de/page", None).unwrap()
        );
    }

    proptest! {
        #[test]
        fn idempotent(
            host in "[a-zA-Z]{1,8}\\.(de|com)",
            segs in prop::collection::vec("[a-zA-Z0-9%._~-]{0,6}", 0..4),
            query in prop::option::of("[a-z0-9=&%]{0,10}"),
            frag in prop::option::of("[a-z]{0,5}"),
        ) {
            let mut raw = format!("HTTP://{host}/{}", segs.join("/"));
            if let Some(q) = query { raw.push('?'); raw.push_str(&q); }
            if let Some(f) = frag { raw.push('#'); raw.push_str(&f); }
            if let Ok(once) = canonicalize_url(&raw, None) {
                let twice = canonicalize_url(&once, None).unwrap();
                prop_assert_eq!(once, twice);
            }
        }
    }
}
