# Command blueprints for the graphene BGK tools
