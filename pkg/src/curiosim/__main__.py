from curiosim.cli import main

main()
