//! Parenthesis words over `X ∪ {⌊, ⌋}` (written `[`, `]` in ASCII) and the
//! injection into decorated trees.

use std::fmt;

use crate::error::{Error, ParenCondition, Result};
use crate::tree::{lex_letter, Alphabet, DecoratedTree, Letter, MAX_PARSE_DEPTH};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Token {
    Letter(Letter),
    Open,
    Close,
}

/// A validated parenthesis word together with its decorated tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParenthesisWord {
    tokens: Vec<Token>,
    tree: DecoratedTree,
}

impl ParenthesisWord {
    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn from_tree(tree: &DecoratedTree) -> Self {
        let text = tree.to_parenthesis_word();
        // Rendering always produces a valid word.
        parse_parenthesis_word(&text).expect("rendered parenthesis word is valid")
    }
}

impl fmt::Display for ParenthesisWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.tokens {
            match t {
                Token::Letter(l) => write!(f, "{l}")?,
                Token::Open => f.write_str("[")?,
                Token::Close => f.write_str("]")?,
            }
        }
        Ok(())
    }
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let mut tokens = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(pos, c)) = chars.peek() {
        match c {
            '[' | '⌊' => {
                tokens.push(Token::Open);
                chars.next();
            }
            ']' | '⌋' => {
                tokens.push(Token::Close);
                chars.next();
            }
            'x' => {
                let (letter, end) = lex_letter(text, pos)?;
                tokens.push(Token::Letter(letter));
                while chars.peek().is_some_and(|&(p, _)| p < end) {
                    chars.next();
                }
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            _ => return Err(Error::parse(pos, format!("unknown token `{c}`"))),
        }
    }
    Ok(tokens)
}

fn violation(condition: ParenCondition, position: usize) -> Error {
    Error::Parenthesis { condition, position }
}

/// Parses and validates a parenthesis word.
///
/// Conditions (i)–(iv) are checked on the token sequence; (v) is checked by
/// requiring every bracketed sub-word, and the word itself, to have one of
/// the shapes `x`, `x[w]`, `[w]x`, `[w]x[w']`.
pub fn parse_parenthesis_word(text: &str) -> Result<ParenthesisWord> {
    let tokens = lex(text)?;
    let n = tokens.len();

    // (i) balanced, and bracket partners for later.
    let mut partner = vec![usize::MAX; n];
    let mut stack = Vec::new();
    for (i, t) in tokens.iter().enumerate() {
        match t {
            Token::Open => stack.push(i),
            Token::Close => {
                let open = stack.pop().ok_or_else(|| violation(ParenCondition::Unbalanced, i))?;
                partner[open] = i;
                partner[i] = open;
            }
            Token::Letter(_) => {}
        }
    }
    if let Some(&open) = stack.last() {
        return Err(violation(ParenCondition::Unbalanced, open));
    }

    for i in 1..n {
        match (tokens[i - 1], tokens[i]) {
            // (ii)
            (Token::Letter(_), Token::Letter(_)) => return Err(violation(ParenCondition::AdjacentLetters, i)),
            // (iii)
            (Token::Open, Token::Close) | (Token::Close, Token::Open) => {
                return Err(violation(ParenCondition::EmptyOrTouchingBrackets, i))
            }
            _ => {}
        }
    }

    // (iv)
    if n > 0 && tokens[0] == Token::Open && partner[0] == n - 1 {
        return Err(violation(ParenCondition::FullWrap, 0));
    }

    let tree = build(&tokens, &partner, 0, n, 0)?;
    Ok(ParenthesisWord { tokens, tree })
}

fn build(tokens: &[Token], partner: &[usize], start: usize, end: usize, depth: usize) -> Result<DecoratedTree> {
    if start == end {
        return Ok(DecoratedTree::Leaf);
    }
    if depth > MAX_PARSE_DEPTH {
        return Err(Error::parse(start, "parenthesis word nested too deeply"));
    }
    let mut pos = start;
    let mut left = DecoratedTree::Leaf;
    if tokens[pos] == Token::Open {
        let close = partner[pos];
        if close == end - 1 {
            // `[[w]]` inside a bracket (the top level is caught by (iv)).
            return Err(violation(ParenCondition::Redundant, pos));
        }
        left = build(tokens, partner, pos + 1, close, depth + 1)?;
        pos = close + 1;
    }
    let letter = match tokens[pos] {
        Token::Letter(l) => l,
        _ => return Err(violation(ParenCondition::Redundant, pos)),
    };
    pos += 1;
    if pos == end {
        return Ok(DecoratedTree::node(left, letter, DecoratedTree::Leaf));
    }
    if tokens[pos] != Token::Open || partner[pos] != end - 1 {
        return Err(violation(ParenCondition::Redundant, pos));
    }
    let right = build(tokens, partner, pos + 1, end - 1, depth + 1)?;
    Ok(DecoratedTree::node(left, letter, right))
}

/// `Φ(δ(w))`.
pub fn delta_to_tree(word: &ParenthesisWord) -> DecoratedTree {
    word.tree.clone()
}

/// Parses and checks every letter against `alphabet`.
pub fn parse_parenthesis_word_in(text: &str, alphabet: &Alphabet) -> Result<ParenthesisWord> {
    let pw = parse_parenthesis_word(text)?;
    for t in &pw.tokens {
        if let Token::Letter(l) = t {
            alphabet.check(*l)?;
        }
    }
    Ok(pw)
}
