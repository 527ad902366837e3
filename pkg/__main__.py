import sys

from PythonScripts.CommandLine import main as command_line


def print_script_version() -> None:
    current_version = "1.0.0"
    print(f"Well-Centered Mesh Toolkit (Version {current_version})\n", file=sys.stderr)


def main():
    print_script_version()  # Print Current Version of Script
    sys.exit(command_line())  # Run the Selected Command


if __name__ == "__main__":
    main()
