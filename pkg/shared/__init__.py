# Numerical library shared by the graphene BGK commands
