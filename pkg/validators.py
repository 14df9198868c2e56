import re
from math import gcd
from typing import Dict, List, Tuple, Optional


class ValidationError(Exception):
    """Custom exception for validation errors."""
    pass


class InputValidator:
    """Handles validation of all user inputs: braid words, twist-knot parameters, slopes and figure ids."""

    MAX_STRANDS = 16
    MAX_LETTERS = 64
    MAX_TWIST_PARAMETER = 3
    MAX_FRAMING = 40
    MAX_THREADS = 256

    BRAID_PATTERN = re.compile(r'^\s*(-?\d+)\s*:(.*)$')
    SLOPE_PATTERN = re.compile(r'^\s*(-?\d+)\s*(?:/\s*(-?\d+))?\s*$')

    FIGURE_IDS = (
        'anchors', 'torus-base', 'torus-staircase', 'branch-set',
        'torus-claims', 'twist-pipeline', 'surgery-step',
    )
    FIGURE_ALIASES = {
        '5': 'anchors', '6': 'torus-base', '7': 'torus-staircase', '8': 'branch-set',
        '9': 'torus-claims', '10': 'torus-claims', '11': 'torus-claims',
        '12': 'twist-pipeline', '13': 'surgery-step', '14': 'surgery-step',
    }
    FIGURES_WITH_T = ('torus-staircase', 'branch-set', 'torus-claims', 'twist-pipeline', 'surgery-step')

    TWISTKNOT_ACTIONS = ('kh', 'width', 'jones', 'det', 'turner')

    @staticmethod
    def parse_braid(text: str) -> Tuple[int, List[Tuple[int, int]]]:
        """Parse '<strands>: <i1> <i2> ...' into (strands, [(index, sign), ...]). Raises ValidationError."""
        if not isinstance(text, str) or not text.strip():
            raise ValidationError("Braid text is required")
        match = InputValidator.BRAID_PATTERN.match(text)
        if not match:
            raise ValidationError(f"Braid text must look like '<strands>: <i1> <i2> ...', got '{text}'")
        strands = int(match.group(1))
        if strands < 1:
            raise ValidationError(f"Strand count must be at least 1, got {strands}")
        if strands > InputValidator.MAX_STRANDS:
            raise ValidationError(f"Strand count must be at most {InputValidator.MAX_STRANDS}")
        letters = []
        for token in match.group(2).split():
            try:
                value = int(token)
            except ValueError:
                raise ValidationError(f"Malformed braid letter '{token}'")
            if value == 0 or abs(value) >= strands:
                raise ValidationError(f"Braid letter {value} out of range for {strands} strands")
            letters.append((abs(value), 1 if value > 0 else -1))
        if len(letters) > InputValidator.MAX_LETTERS:
            raise ValidationError(f"Braid words are limited to {InputValidator.MAX_LETTERS} letters")
        return strands, letters

    @staticmethod
    def validate_braid_text(text: str) -> Tuple[bool, str, Optional[Tuple[int, List[Tuple[int, int]]]]]:
        """Validate braid text. Returns (is_valid, error_message, (strands, letters))."""
        try:
            return True, "", InputValidator.parse_braid(text)
        except ValidationError as e:
            return False, str(e), None

    @staticmethod
    def validate_twist_parameter(value) -> Tuple[bool, str, Optional[int]]:
        """Validate the twist parameter t. Returns (is_valid, error_message, t)."""
        try:
            t = int(value)
        except (TypeError, ValueError):
            return False, "Twist parameter t must be an integer", None
        if t < 0:
            return False, "Twist parameter t must be non-negative", None
        if t > InputValidator.MAX_TWIST_PARAMETER:
            return False, f"Twist parameter t must be at most {InputValidator.MAX_TWIST_PARAMETER}", None
        return True, "", t

    @staticmethod
    def validate_framing(value) -> Tuple[bool, str, Optional[int]]:
        """Validate an integer framing n. Returns (is_valid, error_message, n)."""
        try:
            n = int(value)
        except (TypeError, ValueError):
            return False, "Framing must be an integer", None
        if abs(n) > InputValidator.MAX_FRAMING:
            return False, f"Framing must lie within ±{InputValidator.MAX_FRAMING}", None
        return True, "", n

    @staticmethod
    def validate_slope(text: str) -> Tuple[bool, str, Optional[Tuple[int, int]]]:
        """Validate a slope 'p/q' (or 'p'). Returns (is_valid, error_message, (p, q)) with q >= 0."""
        if not isinstance(text, str):
            return False, "Slope must be a string like '7/2'", None
        match = InputValidator.SLOPE_PATTERN.match(text)
        if not match:
            return False, f"Malformed slope '{text}'", None
        p = int(match.group(1))
        q = int(match.group(2)) if match.group(2) is not None else 1
        if q < 0:
            p, q = -p, -q
        if q == 0 and abs(p) != 1:
            return False, "The only slope with q = 0 is 1/0", None
        if q == 0:
            p = 1
        if gcd(p, q) != 1:
            return False, f"Slope {p}/{q} is not in lowest terms", None
        return True, "", (p, q)

    @staticmethod
    def validate_crossing_ids(text, crossing_count: int) -> Tuple[bool, str, Optional[List[int]]]:
        """Validate a comma-separated list of crossing ids. Returns (is_valid, error_message, ids)."""
        if isinstance(text, (list, tuple)):
            tokens = [str(item) for item in text]
        elif isinstance(text, str) and text.strip():
            tokens = [token for token in re.split(r'[,\s]+', text.strip()) if token]
        else:
            return False, "At least one crossing id is required", None
        ids = []
        for token in tokens:
            try:
                ids.append(int(token))
            except ValueError:
                return False, f"Malformed crossing id '{token}'", None
        for crossing in ids:
            if crossing < 0 or crossing >= crossing_count:
                return False, f"Crossing id {crossing} out of range (diagram has {crossing_count})", None
        if len(set(ids)) != len(ids):
            return False, "Crossing ids must be distinct", None
        return True, "", ids

    @staticmethod
    def validate_figure_id(text: str) -> Tuple[bool, str, Optional[str]]:
        """Validate a figure id or numeric alias. Returns (is_valid, error_message, canonical_id)."""
        if not isinstance(text, str) or not text.strip():
            return False, "Figure id is required", None
        key = text.strip().lower()
        key = InputValidator.FIGURE_ALIASES.get(key, key)
        if key not in InputValidator.FIGURE_IDS:
            return False, f"Unknown figure '{text}'. Choose from: {', '.join(InputValidator.FIGURE_IDS)}", None
        return True, "", key

    @staticmethod
    def validate_thread_count(value) -> Tuple[bool, str]:
        """Validate a worker count. Returns (is_valid, error_message)."""
        if value is None:
            return True, ""
        if not isinstance(value, int) or value < 0 or value > InputValidator.MAX_THREADS:
            return False, f"Thread count must be between 0 and {InputValidator.MAX_THREADS}"
        return True, ""

    @staticmethod
    def validate_twistknot_request(data: Dict) -> Tuple[bool, str, Dict]:
        """Validate a twist-knot request (t plus framing or slope plus action). Returns (is_valid, error_message, cleaned)."""
        cleaned = {}
        is_valid, error, t = InputValidator.validate_twist_parameter(data.get('t'))
        if not is_valid:
            return False, error, {}
        cleaned['t'] = t

        framing, slope = data.get('framing'), data.get('slope')
        if (framing is None) == (slope is None):
            return False, "Give exactly one of framing or slope", {}
        if framing is not None:
            is_valid, error, n = InputValidator.validate_framing(framing)
            if not is_valid:
                return False, error, {}
            cleaned['p'], cleaned['q'] = n, 1
        else:
            is_valid, error, pq = InputValidator.validate_slope(str(slope))
            if not is_valid:
                return False, error, {}
            cleaned['p'], cleaned['q'] = pq

        action = data.get('action') or 'kh'
        if action not in InputValidator.TWISTKNOT_ACTIONS:
            return False, f"Unknown action '{action}'", {}
        cleaned['action'] = action
        return True, "", cleaned
