import gzip
import io
from fractions import Fraction

import pytest

from hiddenrole.efg import MAX, MIN, BehavioralStrategy, expected_value
from hiddenrole.io import (GAME_HEADER, ParseError, frac_str, game_hash, load_game, load_strategy,
                           read_game, save_game, save_strategy, write_game)
from hiddenrole.lp import solve_game_exact


def _text(game):
    buf = io.StringIO()
    write_game(game, buf)
    return buf.getvalue()


class TestGameFormat:
    def test_header_and_sections(self, mp3):
        text = _text(mp3)
        assert text.startswith(GAME_HEADER + "\n[meta]\n")
        assert "[infosets]\n" in text and "[nodes]\n" in text and text.endswith("[end]\n")

    def test_roundtrip(self, cards, tmp_path):
        path = tmp_path / "cards.game"
        save_game(cards, path)
        back = load_game(path)
        assert _text(back) == _text(cards)
        assert solve_game_exact(back).value == Fraction(2, 3)

    def test_gzip(self, mp3, tmp_path):
        path = tmp_path / "mp3.game.gz"
        save_game(mp3, path)
        with gzip.open(path, "rt") as fh:
            assert fh.readline().strip() == GAME_HEADER
        assert _text(load_game(path)) == _text(mp3)

    def test_fractions_as_num_den(self):
        assert frac_str(Fraction(3, 9)) == "1/3"
        assert frac_str(2) == "2/1"

    def test_hash_stable(self, mp3, tmp_path):
        a, b = tmp_path / "a.game", tmp_path / "b.game"
        save_game(mp3, a)
        save_game(mp3, b)
        assert game_hash(a) == game_hash(b)

    @pytest.mark.parametrize("mutate,needle", [
        (lambda t: t.replace(GAME_HEADER, "other 1"), ":1:"),
        (lambda t: t[: t.index("[end]")], "truncated"),
        (lambda t: t.replace("[nodes]\n0 ", "[nodes]\n7 "), "consecutive"),
        (lambda t: t.replace("[nodes]\n", "[nodes]\nx Q\n"), "malformed"),
    ])
    def test_parse_errors(self, mp3, mutate, needle):
        with pytest.raises(ParseError) as exc:
            read_game(io.StringIO(mutate(_text(mp3))), "g.game")
        assert needle in str(exc.value)

    def test_error_names_line(self, mp3):
        lines = _text(mp3).splitlines(keepends=True)
        i = lines.index("[nodes]\n") + 3
        lines[i] = f"{lines[i].split()[0]} Q\n"   # unknown node type
        with pytest.raises(ParseError) as exc:
            read_game(io.StringIO("".join(lines)), "g.game")
        assert exc.value.line == i + 1


class TestStrategyFormat:
    def test_exact_roundtrip(self, cards, tmp_path):
        sol = solve_game_exact(cards)
        save_strategy(sol.x, tmp_path / "x.json")
        save_strategy(sol.y, tmp_path / "y.json")
        x, y = load_strategy(cards, tmp_path / "x.json"), load_strategy(cards, tmp_path / "y.json")
        assert list(x.values) == list(sol.x.values)
        assert expected_value(cards, x, y) == sol.value

    def test_float_roundtrip(self, mp3, tmp_path):
        y = BehavioralStrategy.uniform(mp3, MIN, exact=False)
        save_strategy(y, tmp_path / "y.json")
        back = load_strategy(mp3, tmp_path / "y.json")
        assert not back.exact and list(back.values) == list(y.values)

    def test_wrong_format(self, mp3, tmp_path):
        (tmp_path / "s.json").write_text('{"format": "nope"}')
        with pytest.raises(ParseError):
            load_strategy(mp3, tmp_path / "s.json")

    def test_malformed_json(self, mp3, tmp_path):
        (tmp_path / "s.json").write_text("{")
        with pytest.raises(ParseError):
            load_strategy(mp3, tmp_path / "s.json")
