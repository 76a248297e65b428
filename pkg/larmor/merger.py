from typing import Any


class Merger:
    """Merges setting layers with override semantics"""

    @staticmethod
    def merge(*dicts: dict[str, Any] | None) -> dict[str, Any]:
        """
        Merge multiple dicts with override cascade.
        Later dicts override earlier ones on key conflicts; None values never override.

        Example:
            merge({"B_T": 2.0}, {"B_T": None}, {"B_T": 0.5}) -> {"B_T": 0.5}
        """
        result = {}
        for d in dicts:
            if not d:
                continue
            result |= {key: value for key, value in d.items() if value is not None}
        return result
