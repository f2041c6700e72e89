from typing import Iterable, List, Optional, Tuple

from soccerevents.dsl import rule_ast as ast
from soccerevents.dsl.lexer import KEYWORDS, TOKEN_KINDS, Lexer, Token
from soccerevents.exception.exception import RuleSyntaxError


class Parser_Base:
    """Token cursor with one token of lookahead; ``ct`` is the current token, ``nt`` the next."""

    def __init__(self, lexer: Lexer):
        self.lexer = lexer
        self.ct: Optional[Token] = None
        self.nt: Optional[Token] = None
        self.advance()

    def advance(self) -> None:
        self.ct = self.nt
        self.nt = self.lexer.token()

    def peek(self, kind: str) -> bool:
        assert kind in TOKEN_KINDS
        return self.nt is not None and self.nt.kind == kind

    def peek_eof(self) -> bool:
        return self.nt is None

    def peek_kw(self, value: str) -> bool:
        assert value in KEYWORDS
        return self.peek("KEYWORD") and self.nt.value == value

    def error(self, expected: Iterable[str]) -> RuleSyntaxError:
        if self.nt is None:
            return RuleSyntaxError(self.lexer.end_line, self.lexer.end_col, expected, "end of input")
        return RuleSyntaxError(self.nt.line, self.nt.col, expected, self.nt.describe())

    def match(self, kind: str) -> Token:
        assert kind in TOKEN_KINDS
        if not self.peek(kind):
            raise self.error([kind])
        self.advance()
        return self.ct

    def match_kw(self, value: str) -> Token:
        assert value in KEYWORDS
        if not self.peek_kw(value):
            raise self.error([f"'{value}'"])
        self.advance()
        return self.ct


class Parser(Parser_Base):
    """
    Recursive-descent parser of ``.cer`` rule files::

        rule      ::= 'complex' NAME ':' pattern [ 'lasting' INT '..' INT ]
                      [ 'where' condition ] [ 'emit' 'roles' '{' [ emit { ',' emit } ] '}' ]
        pattern   ::= ( 'seq' | 'and' ) '(' pattern ',' pattern { ',' pattern } ')' [ 'within' INT ]
                    | 'or' '(' pattern ',' pattern { ',' pattern } ')'
                    | [ 'merged' ] NAME [ 'as' NAME ]
        condition ::= conjunct { 'or' conjunct }
        conjunct  ::= unary { 'and' unary }
        unary     ::= 'not' unary | '(' condition ')' | predicate | term OP term
        term      ::= NAME '.' NAME | NUMBER | ( 'team' | 'distance' ) '(' args ')'
        emit      ::= NAME ':' NAME '.' NAME
    """

    def parse_rule_file(self) -> List[ast.Rule]:
        rules = []
        while not self.peek_eof():
            rules.append(self.parse_rule())
        return rules

    def parse_rule(self) -> ast.Rule:
        t_complex = self.match_kw("complex")
        name = self.match("IDENTIFIER").value
        self.match("COLON")
        pattern = self.parse_pattern()

        lasting = None
        if self.peek_kw("lasting"):
            self.advance()
            low = self.parse_integer()
            self.match("DOTDOT")
            high = self.parse_integer()
            lasting = (low, high)

        where = None
        if self.peek_kw("where"):
            self.advance()
            where = self.parse_condition()

        emit: Tuple[Tuple[str, ast.RoleRef], ...] = ()
        if self.peek_kw("emit"):
            self.advance()
            self.match_kw("roles")
            emit = self.parse_emit_block()

        if not self.peek_eof() and not self.peek_kw("complex"):
            raise self.error(["'complex'", "'emit'", "'lasting'", "'where'", "end of input"])
        return ast.Rule(name, pattern, lasting, where, emit, t_complex.line, t_complex.col)

    def parse_integer(self) -> int:
        t_num = self.match("NUMBER")
        if "." in t_num.value:
            raise RuleSyntaxError(t_num.line, t_num.col, ["integer"], t_num.describe())
        return int(t_num.value)

    def parse_pattern(self):
        for operator in ast.PATTERN_OPERATORS:
            if self.peek_kw(operator):
                return self.parse_pattern_call(operator)
        if self.peek_kw("merged") or self.peek("IDENTIFIER"):
            return self.parse_event_ref()
        raise self.error(["'seq'", "'and'", "'or'", "'merged'", "IDENTIFIER"])

    def parse_pattern_call(self, operator: str) -> ast.Pattern:
        t_op = self.match_kw(operator)
        self.match("LPAREN")
        operands = [self.parse_pattern()]
        self.match("COMMA")
        operands.append(self.parse_pattern())
        while self.peek("COMMA"):
            self.advance()
            operands.append(self.parse_pattern())
        self.match("RPAREN")
        within = None
        if operator != "or" and self.peek_kw("within"):
            self.advance()
            within = self.parse_integer()
        return ast.Pattern(operator, tuple(operands), within, t_op.line, t_op.col)

    def parse_event_ref(self) -> ast.EventRef:
        merged = False
        start = self.nt
        if self.peek_kw("merged"):
            self.advance()
            merged = True
        name = self.match("IDENTIFIER").value
        alias = None
        if self.peek_kw("as"):
            self.advance()
            alias = self.match("IDENTIFIER").value
        return ast.EventRef(name, alias, merged, start.line, start.col)

    def parse_emit_block(self) -> Tuple[Tuple[str, ast.RoleRef], ...]:
        self.match("LBRACE")
        items = []
        if not self.peek("RBRACE"):
            items.append(self.parse_emit_item())
            while self.peek("COMMA"):
                self.advance()
                items.append(self.parse_emit_item())
        self.match("RBRACE")
        return tuple(items)

    def parse_emit_item(self) -> Tuple[str, ast.RoleRef]:
        role = self.match("IDENTIFIER").value
        self.match("COLON")
        t_alias = self.match("IDENTIFIER")
        return role, self.parse_role_ref(t_alias)

    def parse_role_ref(self, t_alias: Token) -> ast.RoleRef:
        self.match("DOT")
        attribute = self.match("IDENTIFIER").value
        return ast.RoleRef(t_alias.value, attribute, t_alias.line, t_alias.col)

    def parse_condition(self):
        start = self.nt
        operands = [self.parse_conjunct()]
        while self.peek_kw("or"):
            self.advance()
            operands.append(self.parse_conjunct())
        if len(operands) == 1:
            return operands[0]
        return ast.BoolOp("or", tuple(operands), start.line, start.col)

    def parse_conjunct(self):
        start = self.nt
        operands = [self.parse_unary()]
        while self.peek_kw("and"):
            self.advance()
            operands.append(self.parse_unary())
        if len(operands) == 1:
            return operands[0]
        return ast.BoolOp("and", tuple(operands), start.line, start.col)

    def parse_unary(self):
        if self.peek_kw("not"):
            t_not = self.match_kw("not")
            return ast.Not(self.parse_unary(), t_not.line, t_not.col)
        if self.peek("LPAREN"):
            self.advance()
            inner = self.parse_condition()
            self.match("RPAREN")
            return inner
        if self.peek("IDENTIFIER") and self.nt.value in ast.PREDICATES:
            t_name = self.match("IDENTIFIER")
            if self.peek("LPAREN"):
                return self.parse_call(t_name)
            return self.parse_comparison(self.parse_role_ref(t_name))
        return self.parse_comparison(self.parse_term())

    def parse_comparison(self, left) -> ast.Comparison:
        t_op = self.match("OPERATOR")
        right = self.parse_term()
        return ast.Comparison(t_op.value, left, right, t_op.line, t_op.col)

    def parse_term(self):
        if self.peek("NUMBER"):
            t_num = self.match("NUMBER")
            return ast.Number(float(t_num.value), t_num.line, t_num.col)
        if not self.peek("IDENTIFIER"):
            raise self.error(["IDENTIFIER", "NUMBER", "'not'", "LPAREN"])
        t_name = self.match("IDENTIFIER")
        if self.peek("LPAREN"):
            if t_name.value not in ast.VALUE_FUNCTIONS:
                raise RuleSyntaxError(t_name.line, t_name.col, sorted(ast.VALUE_FUNCTIONS | ast.PREDICATES),
                                      t_name.describe())
            return self.parse_call(t_name)
        return self.parse_role_ref(t_name)

    def parse_call(self, t_name: Token) -> ast.Call:
        self.match("LPAREN")
        args = [self.parse_argument()]
        while self.peek("COMMA"):
            self.advance()
            args.append(self.parse_argument())
        self.match("RPAREN")
        return ast.Call(t_name.value, tuple(args), t_name.line, t_name.col)

    def parse_argument(self):
        if self.peek("IDENTIFIER") and self.nt.value in ast.ZONES:
            t_zone = self.match("IDENTIFIER")
            return ast.ZoneName(t_zone.value, t_zone.line, t_zone.col)
        return self.parse_term()


def parse(source: str) -> List[ast.Rule]:
    """
    Parses rule text into one Rule per ``complex`` declaration.

    Raises:
        RuleSyntaxError: At the first token that does not fit the grammar, with the
            set of tokens that would have been accepted there.
    """
    return Parser(Lexer(source)).parse_rule_file()
