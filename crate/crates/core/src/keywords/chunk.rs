use super::{KeywordSpan, Pos, Token};

fn in_phrase(pos: Pos) -> bool {
    matches!(pos, Pos::Adj | Pos::Noun | Pos::Propn | Pos::Num)
}

/// Maximal `(ADJ|NOUN|PROPN|NUM)* (NOUN|PROPN)+` spans, left to right.
///
/// A run of phrase-class tokens is cut after its last noun; trailing
/// modifiers are dropped. Determiners never enter a span.
pub fn chunk_noun_phrases(tokens: &[Token]) -> Vec<KeywordSpan> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        if !in_phrase(tokens[i].pos) {
            i += 1;
            continue;
        }
        let start = i;
        let mut last_noun = None;
        while i < tokens.len() && in_phrase(tokens[i].pos) {
            if tokens[i].pos.is_noun() {
                last_noun = Some(i);
            }
            i += 1;
        }
        if let Some(end) = last_noun {
            out.push(KeywordSpan::from_tokens(tokens, start, end));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keywords::{RuleTagger, Tagger};

    fn chunk(text: &str) -> Vec<String> {
        chunk_noun_phrases(&RuleTagger::default().tag(text))
            .into_iter()
            .map(|s| s.surface)
            .collect()
    }

    fn toks(tags: &[Pos]) -> Vec<Token> {
        tags.iter()
            .enumerate()
            .map(|(index, &pos)| Token {
                text: format!("w{index}"),
                pos,
                index,
            })
            .collect()
    }

    #[test]
    fn compound_stays_whole() {
        assert_eq!(chunk("Human Computer Interaction"), vec!["Human Computer Interaction"]);
    }

    #[test]
    fn adposition_breaks_span() {
        assert_eq!(chunk("the joy of stats"), vec!["joy", "stats"]);
    }

    #[test]
    fn empty_input() {
        assert!(chunk_noun_phrases(&[]).is_empty());
    }

    #[test]
    fn leading_det_stripped_trailing_adj_dropped() {
        let t = toks(&[Pos::Det, Pos::Adj, Pos::Noun, Pos::Adj, Pos::Verb, Pos::Noun]);
        let s = chunk_noun_phrases(&t);
        assert_eq!(s.len(), 2);
        assert_eq!((s[0].token_start, s[0].token_end), (1, 2));
        assert_eq!((s[1].token_start, s[1].token_end), (5, 5));
    }

    #[test]
    fn adjective_only_run_yields_nothing() {
        assert!(chunk_noun_phrases(&toks(&[Pos::Adj, Pos::Num, Pos::Adj])).is_empty());
    }

    #[test]
    fn number_inside_name() {
        assert_eq!(chunk("the Canon EOS 40D"), vec!["Canon EOS 40D"]);
    }
}
