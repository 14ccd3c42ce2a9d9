"""Named registries for pluggable components.

Solver backends and positioning methods register themselves under a unique
key during module import; callers look them up by name. This decouples
discovery from implementation, so a new backend needs no changes to the
pipeline.
"""

from __future__ import annotations

from typing import Any, Callable, Generic, TypeVar

T = TypeVar("T")


class Registry(Generic[T]):
    """Registry of factories keyed by name.

    THREAD SAFETY: Not thread-safe. Registration should happen during module
    initialization before any worker threads are spawned; lookups afterwards
    are read-only and safe.
    """

    def __init__(self, kind: str):
        self._kind = kind
        self._factories: dict[str, Callable[..., T]] = {}

    def register(self, name: str, factory: Callable[..., T]) -> None:
        """Register a factory under ``name``."""
        if name in self._factories:
            raise ValueError(f"{self._kind} '{name}' already registered")
        self._factories[name] = factory

    def get(self, name: str) -> Callable[..., T]:
        """Get a factory by name."""
        if name not in self._factories:
            raise ValueError(
                f"Unknown {self._kind} '{name}'. "
                f"Available: {list(self._factories.keys())}"
            )
        return self._factories[name]

    def names(self) -> list[str]:
        """List all registered names."""
        return list(self._factories.keys())

    def create(self, name: str, **kwargs: Any) -> T:
        """Instantiate a registered component by name."""
        return self.get(name)(**kwargs)

    def __contains__(self, name: object) -> bool:
        return name in self._factories
