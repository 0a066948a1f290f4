from rich import print

from germrenorm.core.app import create_app_manager


def main():
    """Poles of the two-edge bubble in four dimensions."""
    engine = create_app_manager("config.json", dim=4).get_engine()
    report = engine.poles({"vertices": [1, 2], "edges": [[1, 2], [1, 2]]})
    print("[bold green]banana-2, d=4[/bold green]")
    print(report)


if __name__ == "__main__":
    main()
