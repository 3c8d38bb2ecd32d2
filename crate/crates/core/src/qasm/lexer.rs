use super::QasmError;

#[derive(Debug, Clone, PartialEq)]
pub(super) enum Tok {
    Ident(String),
    /// Numeric literal kept as written (the version header needs the text).
    Number(String),
    Str(String),
    Punct(char),
    Arrow,
}

#[derive(Debug, Clone, PartialEq)]
pub(super) struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

pub(super) fn lex(text: &str) -> Result<Vec<Spanned>, QasmError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut column) = (0usize, 1usize, 1usize);

    let advance = |c: char, i: &mut usize, line: &mut usize, column: &mut usize| {
        *i += 1;
        if c == '\n' {
            *line += 1;
            *column = 1;
        } else {
            *column += 1;
        }
    };

    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, column);
        if c.is_whitespace() {
            advance(c, &mut i, &mut line, &mut column);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                advance(chars[i], &mut i, &mut line, &mut column);
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            advance('/', &mut i, &mut line, &mut column);
            advance('*', &mut i, &mut line, &mut column);
            loop {
                if i >= chars.len() {
                    return Err(QasmError::Syntax {
                        line: start_line,
                        column: start_col,
                        message: "unterminated block comment".into(),
                    });
                }
                if chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
                    advance('*', &mut i, &mut line, &mut column);
                    advance('/', &mut i, &mut line, &mut column);
                    break;
                }
                advance(chars[i], &mut i, &mut line, &mut column);
            }
            continue;
        }

        let tok = if c.is_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                s.push(chars[i]);
                advance(chars[i], &mut i, &mut line, &mut column);
            }
            Tok::Ident(s)
        } else if c.is_ascii_digit()
            || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
        {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                s.push(chars[i]);
                advance(chars[i], &mut i, &mut line, &mut column);
            }
            // exponent
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while i < j {
                        s.push(chars[i]);
                        advance(chars[i], &mut i, &mut line, &mut column);
                    }
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        s.push(chars[i]);
                        advance(chars[i], &mut i, &mut line, &mut column);
                    }
                }
            }
            Tok::Number(s)
        } else if c == '"' {
            advance(c, &mut i, &mut line, &mut column);
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None | Some('\n') => {
                        return Err(QasmError::Syntax {
                            line: start_line,
                            column: start_col,
                            message: "unterminated string literal".into(),
                        })
                    }
                    Some('"') => {
                        advance('"', &mut i, &mut line, &mut column);
                        break;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        advance(ch, &mut i, &mut line, &mut column);
                    }
                }
            }
            Tok::Str(s)
        } else if c == '-' && chars.get(i + 1) == Some(&'>') {
            advance('-', &mut i, &mut line, &mut column);
            advance('>', &mut i, &mut line, &mut column);
            Tok::Arrow
        } else if ";,{}[]()=-+*/".contains(c) {
            advance(c, &mut i, &mut line, &mut column);
            Tok::Punct(c)
        } else {
            return Err(QasmError::Syntax {
                line,
                column,
                message: format!("unexpected character {c:?}"),
            });
        };
        out.push(Spanned {
            tok,
            line: start_line,
            column: start_col,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(text: &str) -> Vec<Tok> {
        lex(text).unwrap().into_iter().map(|s| s.tok).collect()
    }

    #[test]
    fn lexes_header_and_call() {
        assert_eq!(
            kinds("OPENQASM 3.0;\nrz(1e-3) q[0]; // trailing"),
            vec![
                Tok::Ident("OPENQASM".into()),
                Tok::Number("3.0".into()),
                Tok::Punct(';'),
                Tok::Ident("rz".into()),
                Tok::Punct('('),
                Tok::Number("1e-3".into()),
                Tok::Punct(')'),
                Tok::Ident("q".into()),
                Tok::Punct('['),
                Tok::Number("0".into()),
                Tok::Punct(']'),
                Tok::Punct(';'),
            ]
        );
    }

    #[test]
    fn positions_and_comments() {
        let toks = lex("/* a\n b */ x\n  y").unwrap();
        assert_eq!((toks[0].line, toks[0].column), (2, 7));
        assert_eq!((toks[1].line, toks[1].column), (3, 3));
    }

    #[test]
    fn rejects_stray_characters() {
        assert!(matches!(
            lex("#pragma"),
            Err(QasmError::Syntax {
                line: 1,
                column: 1,
                ..
            })
        ));
        assert!(lex("\"open").is_err());
        assert!(lex("/* open").is_err());
    }
}
